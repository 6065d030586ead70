#include "fogfleet/report.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fogfleet::report {

using nlohmann::json;

namespace {

std::string fmt_ms(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<sim::trace_record>& trace,
                     const sim::scenario_config& config) {
    out << "request_index,send_ms,timed_out,latency_ms,winner_path,egress_bytes,path_outcomes\n";
    for (const auto& r : trace) {
        out << r.request_index << ',' << fmt_ms(r.send_ms) << ',' << (r.timed_out ? 1 : 0) << ',';
        if (r.latency_ms) out << fmt_ms(*r.latency_ms);
        out << ',';
        if (r.winner) {
            const auto& w = r.outcomes[*r.winner];
            out << config.interfaces[w.interface_idx] << "->" << config.servers[w.server_idx].name;
        }
        out << ',' << r.egress_bytes << ',';
        for (std::size_t k = 0; k < r.outcomes.size(); ++k) {
            const auto& o = r.outcomes[k];
            if (k) out << ';';
            out << config.interfaces[o.interface_idx] << "->" << config.servers[o.server_idx].name
                << ':';
            switch (o.status) {
                case sim::path_status::responded: out << fmt_ms(o.response_ms - r.send_ms); break;
                case sim::path_status::lost_interface_down: out << "lost_interface_down"; break;
                case sim::path_status::lost_server_down: out << "lost_server_down"; break;
            }
        }
        out << '\n';
    }
}

std::vector<trace_row> read_trace_csv(std::istream& in) {
    std::vector<trace_row> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        // outcomes column may not contain commas; simple split is enough
        while (cols.size() < 6) {
            auto pos = line.find(',', start);
            if (pos == std::string::npos) {
                cols.push_back(line.substr(start));
                start = line.size();
                break;
            }
            cols.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (cols.size() < 6) throw std::runtime_error("trace csv: malformed row: " + line);
        trace_row r;
        r.request_index = std::stoull(cols[0]);
        r.send_ms = std::stod(cols[1]);
        r.timed_out = cols[2] == "1";
        if (!r.timed_out && !cols[3].empty()) r.latency_ms = std::stod(cols[3]);
        r.egress_bytes = std::stoull(cols[5]);
        rows.push_back(r);
    }
    return rows;
}

void write_events_jsonl(std::ostream& out, const std::vector<sim::sim_event_log_entry>& events) {
    for (const auto& e : events) {
        json j;
        j["t_ms"] = e.t_ms;
        j["event"] = e.kind;
        j["detail"] = e.detail;
        out << j.dump() << '\n';
    }
}

std::string summary_json(const sim::sim_result& result, const sim::scenario_config& config) {
    json j;
    j["requests"] = result.trace.size();
    j["delivered"] = result.delivered;
    j["timeouts"] = result.timeouts;
    j["duplicate_drops"] = result.duplicate_drops;
    j["late_drops"] = result.late_drops;
    j["seed"] = config.seed;
    std::vector<double> latencies;
    std::uint64_t egress = 0;
    for (const auto& r : result.trace) {
        if (r.latency_ms) latencies.push_back(*r.latency_ms);
        egress += r.egress_bytes;
    }
    j["egress_bytes"] = egress;
    if (!latencies.empty()) {
        auto s = reliability::summarize(latencies);
        j["latency"] = {{"count", s.count}, {"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms},
                        {"p99_ms", s.p99_ms}, {"max_ms", s.max_ms}};
    }
    if (!result.trace.empty())
        j["timeout_fraction"] =
            static_cast<double>(result.timeouts) / static_cast<double>(result.trace.size());
    if (!result.assignment_server_of.empty()) {
        json a = json::array();
        for (std::size_t i = 0; i < result.assignment_server_of.size(); ++i)
            a.push_back({{"interface", config.interfaces[i]},
                         {"server", config.servers[result.assignment_server_of[i]].name}});
        j["assignment"] = a;
    }
    return j.dump(2);
}

std::string comparison_json(const sim::comparison& cmp) {
    json j;
    json vs = json::array();
    for (const auto& v : cmp.variants) {
        json e;
        e["name"] = v.name;
        e["requests"] = v.requests;
        e["timeout_fraction"] = v.timeout_fraction;
        e["egress_bytes"] = v.egress_bytes;
        e["mean_ms"] = v.latency.mean_ms;
        e["p50_ms"] = v.latency.p50_ms;
        e["p99_ms"] = v.latency.p99_ms;
        e["max_ms"] = v.latency.max_ms;
        vs.push_back(e);
    }
    j["variants"] = vs;
    j["mean_improvement"] = cmp.mean_improvement;
    j["p99_improvement"] = cmp.p99_improvement;
    return j.dump(2);
}

std::string comparison_table(const sim::comparison& cmp) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-20s %10s %10s %10s %10s %9s %8s %8s\n", "variant", "mean_ms",
                  "p50_ms", "p99_ms", "max_ms", "timeout%", "x_mean", "x_p99");
    out << buf;
    for (const auto& v : cmp.variants) {
        double xm = cmp.mean_improvement.count(v.name) ? cmp.mean_improvement.at(v.name) : 1.0;
        double xp = cmp.p99_improvement.count(v.name) ? cmp.p99_improvement.at(v.name) : 1.0;
        std::snprintf(buf, sizeof buf, "%-20s %10.3f %10.3f %10.3f %10.3f %9.4f %8.2f %8.2f\n",
                      v.name.c_str(), v.latency.mean_ms, v.latency.p50_ms, v.latency.p99_ms,
                      v.latency.max_ms, v.timeout_fraction * 100.0, xm, xp);
        out << buf;
    }
    return out.str();
}

std::vector<histogram_bucket> histogram(const std::vector<double>& latencies_ms,
                                        std::size_t bucket_count) {
    if (latencies_ms.empty()) throw std::invalid_argument("histogram: no samples");
    if (bucket_count == 0) throw std::invalid_argument("histogram: bucket_count must be > 0");
    double max = *std::max_element(latencies_ms.begin(), latencies_ms.end());
    if (max <= 0) max = 1.0;
    double width = max / static_cast<double>(bucket_count);
    std::vector<histogram_bucket> buckets(bucket_count);
    for (std::size_t b = 0; b < bucket_count; ++b) {
        buckets[b].lo_ms = width * static_cast<double>(b);
        buckets[b].hi_ms = width * static_cast<double>(b + 1);
    }
    for (double v : latencies_ms) {
        auto b = static_cast<std::size_t>(v / width);
        if (b >= bucket_count) b = bucket_count - 1;  // max lands in the last bucket
        ++buckets[b].count;
    }
    return buckets;
}

void write_histogram_csv(std::ostream& out, const std::vector<histogram_bucket>& buckets) {
    out << "lo_ms,hi_ms,count\n";
    for (const auto& b : buckets)
        out << fmt_ms(b.lo_ms) << ',' << fmt_ms(b.hi_ms) << ',' << b.count << '\n';
}

void write_cdf_csv(std::ostream& out, const std::vector<double>& latencies_ms, std::size_t points) {
    if (latencies_ms.empty()) throw std::invalid_argument("cdf: no samples");
    std::vector<double> sorted = latencies_ms;
    std::sort(sorted.begin(), sorted.end());
    double max = sorted.back();
    if (max <= 0) max = 1.0;
    out << "t_ms,fraction\n";
    for (std::size_t k = 0; k <= points; ++k) {
        double t = max * static_cast<double>(k) / static_cast<double>(points);
        auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
        double frac = static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
        out << fmt_ms(t) << ',' << fmt_ms(frac) << '\n';
    }
}

}  // namespace fogfleet::report
