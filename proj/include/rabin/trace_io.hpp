#pragma once

// CSV traces, trial logs and verification reports.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rabin/learner.hpp"
#include "rabin/traffic.hpp"
#include "rabin/verifier.hpp"

namespace rabin {

inline std::string format_number(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

/// Quotes a CSV field when it holds a comma, quote or newline.
inline std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Header: step,mdp_state,dra_state,action,reward,labels. With a traffic
/// configuration, columns x1..x4 carry the subinterval midpoints.
inline std::string trace_csv(const std::vector<TraceStep>& trace, const LabeledMdp& m,
                             const std::optional<TrafficConfig>& traffic = std::nullopt) {
  std::ostringstream out;
  out << "step,mdp_state,dra_state,action,reward,labels";
  if (traffic) out << ",x1,x2,x3,x4";
  out << "\n";
  std::optional<TrafficIndex> idx;
  if (traffic) idx.emplace(*traffic);
  for (const auto& t : trace) {
    out << t.step << ',' << t.mdp_state << ',' << t.dra_state << ',' << csv_field(m.actions.at(t.action)) << ','
        << format_number(t.reward) << ',';
    bool first = true;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      if (!((t.labels >> i) & 1U)) continue;
      out << (first ? "" : ";") << m.atoms[i];
      first = false;
    }
    if (traffic) {
      auto mid = traffic_midpoints(*traffic, idx->decode(t.mdp_state));
      for (double x : mid) out << ',' << format_number(x);
    }
    out << "\n";
  }
  return out.str();
}

inline std::string trial_log_csv(const std::vector<TrialRecord>& log) {
  std::ostringstream out;
  out << "trial,steps,g_visits,b_visits,resets\n";
  for (const auto& r : log)
    out << r.trial << ',' << r.steps << ',' << r.good_visits << ',' << r.bad_visits << ',' << r.resets << "\n";
  return out.str();
}

/// Pair indices in the report are 1-based.
inline std::string report_json(const VerificationResult& v) {
  nlohmann::json j;
  j["prob_one"] = v.prob_one;
  j["witness_pair"] = v.witness_pair ? nlohmann::json(*v.witness_pair + 1) : nlohmann::json(nullptr);
  j["case"] = v.violated_case ? nlohmann::json(std::to_string(*v.violated_case)) : nlohmann::json(nullptr);
  j["recurrent_classes"] = v.recurrent_classes;
  j["transient"] = v.transient;
  return j.dump(1);
}

}  // namespace rabin
