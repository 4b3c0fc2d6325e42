#include "nnpipe/stats.hpp"

#include <cstdio>
#include "json.hpp"
#include <sstream>

namespace nnpipe {

double bench_relative_throughput(std::span<const double> single_rates,
                                 std::span<const double> multi_rates, unsigned hw_count) {
  if (single_rates.size() != multi_rates.size()) {
    throw Error("single and multi rate lists differ in length");
  }
  if (single_rates.empty()) throw Error("no rates given");
  if (hw_count == 0) throw Error("hardware count must be at least 1");
  double sum = 0;
  for (std::size_t k = 0; k < single_rates.size(); ++k) {
    if (single_rates[k] <= 0) throw Error("single rate " + std::to_string(k) + " is not positive");
    sum += multi_rates[k] / single_rates[k];
  }
  return (sum / hw_count - 1.0) * 100.0;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << "  ";
      if (i == 0) {
        out << r[i] << std::string(width[i] - r[i].size(), ' ');
      } else {
        out << std::string(width[i] - r[i].size(), ' ') << r[i];
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

std::string format_report(const RunReport& report) {
  std::ostringstream out;
  std::vector<std::vector<std::string>> sinks{
      {"sink", "kind", "frames", "fps", "lat_mean_ms", "lat_p95_ms", "eos"}};
  for (const auto& s : report.sinks) {
    sinks.push_back({s.name, s.kind, std::to_string(s.frames), fixed(s.fps, 1),
                     fixed(s.mean_latency_ms, 3), fixed(s.p95_latency_ms, 3),
                     s.eos ? "yes" : "no"});
  }
  out << table(sinks);
  if (!report.queues.empty()) {
    std::vector<std::vector<std::string>> queues{{"queue", "capacity", "max_used", "dropped"}};
    for (const auto& q : report.queues) {
      queues.push_back({q.name, std::to_string(q.capacity), std::to_string(q.max_occupancy),
                        std::to_string(q.dropped)});
    }
    out << '\n' << table(queues);
  }
  out << "\nelapsed " << fixed(report.elapsed_s, 3) << " s, payload copies " << report.copies
      << " (" << report.copied_bytes << " bytes)\n";
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string report_json(const RunReport& report, int indent) {
  nlohmann::json j;
  j["elapsed_s"] = report.elapsed_s;
  j["copies"] = report.copies;
  j["copied_bytes"] = report.copied_bytes;
  j["sinks"] = nlohmann::json::array();
  for (const auto& s : report.sinks) {
    j["sinks"].push_back({{"name", s.name},
                          {"kind", s.kind},
                          {"frames", s.frames},
                          {"fps", s.fps},
                          {"latency_mean_ms", s.mean_latency_ms},
                          {"latency_p95_ms", s.p95_latency_ms},
                          {"eos", s.eos}});
  }
  j["queues"] = nlohmann::json::array();
  for (const auto& q : report.queues) {
    j["queues"].push_back({{"name", q.name},
                           {"capacity", q.capacity},
                           {"max_occupancy", q.max_occupancy},
                           {"dropped", q.dropped}});
  }
  j["pads"] = nlohmann::json::array();
  for (const auto& p : report.progress) {
    j["pads"].push_back({{"pad", p.pad}, {"frames", p.frames}, {"eos", p.eos}});
  }
  j["warnings"] = report.warnings;
  return j.dump(indent);
}

}  // namespace nnpipe
