#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace mfsim {

double percentile(std::vector<double> values, double q) {
  MFSIM_CHECK(!values.empty(), "percentile of empty set");
  std::sort(values.begin(), values.end());
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(values.size())));
  if (rank == 0) rank = 1;
  return values[rank - 1];
}

MetricsReport build_metrics(const RunResult& run) {
  MetricsReport m;
  m.total = static_cast<long>(run.requests.size());
  m.pruned = run.pruned_count;

  std::vector<double> ttfts, earliness_nonneg;
  double stall_sum = 0.0;
  for (const RequestRow& r : run.requests) {
    RequestMetric row;
    row.id = r.id;
    row.arrival = r.arrival;
    row.deadline_rel = r.deadline - r.arrival;
    row.stall = r.stall;
    row.pruned = r.pruned;
    stall_sum += r.stall;
    if (r.done) {
      row.finished = true;
      row.ttft = *r.done - r.arrival;
      row.earliness = row.deadline_rel - row.ttft;
      row.slo_met = row.ttft <= row.deadline_rel;
      ++m.finished;
      if (row.slo_met) ++m.met;
      ttfts.push_back(row.ttft);
      earliness_nonneg.push_back(std::max(0.0, row.earliness));
    }
    m.rows.push_back(row);
  }
  for (const CoflowRow& c : run.coflows) {
    if (c.done == kNoTime || c.release == kNoTime) continue;
    m.cct.push_back(c.done - c.release);
    m.stalls.push_back(c.stall);
  }

  if (m.total > 0) {
    m.slo_attainment = static_cast<double>(m.met) / static_cast<double>(m.total);
    m.stall_mean = stall_sum / static_cast<double>(m.total);
  }
  if (!ttfts.empty()) {
    double s = 0.0;
    for (double t : ttfts) s += t;
    m.ttft_mean = s / static_cast<double>(ttfts.size());
    m.ttft_p99 = percentile(ttfts, 0.99);
    s = 0.0;
    for (double e : earliness_nonneg) s += e;
    m.earliness_nonneg_mean = s / static_cast<double>(earliness_nonneg.size());
  }
  if (!m.cct.empty()) {
    double s = 0.0;
    for (double c : m.cct) s += c;
    m.cct_mean = s / static_cast<double>(m.cct.size());
    m.cct_p99 = percentile(m.cct, 0.99);
  }
  return m;
}

namespace {
std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace

std::string requests_csv(const MetricsReport& m) {
  std::string out = "request_id,arrival_s,ttft_s,deadline_s,slo_met,earliness_s,stall_s\n";
  for (const RequestMetric& r : m.rows) {
    out += std::to_string(r.id);
    out += ',';
    out += fmt9(r.arrival);
    out += ',';
    out += r.finished ? fmt9(r.ttft) : "nan";
    out += ',';
    out += fmt9(r.deadline_rel);
    out += ',';
    out += r.slo_met ? '1' : '0';
    out += ',';
    out += r.finished ? fmt9(r.earliness) : "nan";
    out += ',';
    out += fmt9(r.stall);
    out += '\n';
  }
  return out;
}

std::string summary_json(const MetricsReport& m, const std::string& policy, long seed,
                         double rate_rps) {
  nlohmann::ordered_json j;
  j["policy"] = policy;
  j["seed"] = seed;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  j["slo_attainment"] = opt(m.slo_attainment);
  j["ttft_mean_s"] = opt(m.ttft_mean);
  j["ttft_p99_s"] = opt(m.ttft_p99);
  j["cct_mean_s"] = opt(m.cct_mean);
  j["cct_p99_s"] = opt(m.cct_p99);
  j["earliness_nonneg_mean_s"] = opt(m.earliness_nonneg_mean);
  j["pruned_count"] = m.pruned;
  j["stall_mean_s"] = m.stall_mean;
  j["requests"] = m.total;
  j["finished"] = m.finished;
  j["rate_rps"] = rate_rps;
  return j.dump(2) + "\n";
}

void write_report(const MetricsReport& m, const std::string& policy, long seed,
                  double rate_rps, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);
  auto write = [&](const std::string& name, const std::string& body) {
    fs::path p = fs::path(out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write output file: " + p.string());
    out << body;
    if (!out) throw IoError("write failed: " + p.string());
  };
  write("requests.csv", requests_csv(m));
  write("summary.json", summary_json(m, policy, seed, rate_rps));
}

}  // namespace mfsim
