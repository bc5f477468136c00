#include "restprobe/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace restprobe::metrics {

CoverageResult operation_coverage(const std::vector<Interaction>& log, const oas::ApiModel& api) {
    CoverageResult out;
    out.flags.assign(api.operations.size(), false);
    for (const auto& ix : log) {
        if (ix.outcome != OutcomeClass::Success2xx) continue;
        if (ix.op_index < 0 || ix.op_index >= static_cast<int>(out.flags.size())) continue;
        out.flags[static_cast<std::size_t>(ix.op_index)] = true;
    }
    out.covered = static_cast<std::size_t>(std::count(out.flags.begin(), out.flags.end(), true));
    out.fraction = out.flags.empty() ? 0.0
                                     : static_cast<double>(out.covered) /
                                           static_cast<double>(out.flags.size());
    return out;
}

std::string fault_signature(int status, const std::string& body) {
    (void)status;
    if (body.empty()) return "<empty-5xx>";

    std::string s;
    s.reserve(body.size());
    for (char c : body) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    // Volatile content first: quoted literals, UUIDs, long hex runs, digits.
    static const std::regex quoted(R"(("([^"\\]|\\.)*")|('([^'\\]|\\.)*'))");
    s = std::regex_replace(s, quoted, "$$");
    static const std::regex uuid(
        R"([0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12})");
    s = std::regex_replace(s, uuid, "#");
    static const std::regex hexrun(R"((0x)?[0-9a-f]*[0-9][0-9a-f]*)");
    // hex runs of length >= 8 that contain at least one digit
    {
        std::string out;
        std::sregex_iterator it(s.begin(), s.end(), hexrun), end;
        std::size_t last = 0;
        for (; it != end; ++it) {
            const auto& m = *it;
            const std::string tok = m.str();
            const std::size_t hexlen = tok.rfind("0x", 0) == 0 ? tok.size() - 2 : tok.size();
            out.append(s, last, static_cast<std::size_t>(m.position()) - last);
            if (hexlen >= 8) out += "#";
            else out += tok;
            last = static_cast<std::size_t>(m.position() + m.length());
        }
        out.append(s, last, std::string::npos);
        s = std::move(out);
    }
    static const std::regex digits(R"([0-9]+)");
    s = std::regex_replace(s, digits, "#");
    static const std::regex ws(R"(\s+)");
    s = std::regex_replace(s, ws, " ");

    if (s.size() > 512) s.resize(512);
    return s;
}

bool FaultRegistry::record(const Interaction& ix) {
    if (ix.outcome != OutcomeClass::ServerError5xx) return false;
    const auto sig = fault_signature(ix.status, ix.response_body);
    if (first_seen_.count(sig)) return false;
    first_seen_[sig] = ix.sequence;
    statuses_[sig] = ix.status;
    return true;
}

void Timeline::record(double elapsed_s, std::uint64_t requests, std::size_t ops_covered,
                      std::size_t unique_faults) {
    samples_.push_back({elapsed_s, requests, ops_covered, unique_faults});
    last_periodic_s_ = elapsed_s;
}

void Timeline::maybe_periodic(double elapsed_s) {
    if (samples_.empty()) return;
    if (elapsed_s - last_periodic_s_ < kPeriodicIntervalS) return;
    Sample s = samples_.back();
    s.elapsed_s = elapsed_s;
    samples_.push_back(s);
    last_periodic_s_ = elapsed_s;
}

std::string Timeline::to_csv() const {
    std::ostringstream out;
    out << "elapsed_s,requests,ops_covered,unique_faults\n";
    for (const auto& s : samples_) {
        out << s.elapsed_s << ',' << s.requests << ',' << s.ops_covered << ',' << s.unique_faults
            << '\n';
    }
    return out.str();
}

double auc(const Timeline& timeline, Metric metric, double horizon, Abscissa abscissa) {
    if (horizon <= 0.0 || timeline.empty()) return 0.0;

    // Collapse to a monotone step function on the chosen axis: last sample
    // wins when several share an abscissa value.
    std::vector<std::pair<double, double>> steps;
    for (const auto& s : timeline.samples()) {
        const double x = abscissa == Abscissa::Requests ? static_cast<double>(s.requests)
                                                        : s.elapsed_s;
        const double y = metric == Metric::OperationsCovered
                             ? static_cast<double>(s.ops_covered)
                             : static_cast<double>(s.unique_faults);
        if (!steps.empty() && steps.back().first == x) {
            steps.back().second = y;
        } else if (!steps.empty() && x < steps.back().first) {
            continue;  // defensively ignore non-monotone abscissae
        } else {
            steps.emplace_back(x, y);
        }
    }

    double area = 0.0;
    double prev_x = 0.0;
    double prev_y = 0.0;  // metric is zero before the first sample
    for (const auto& [x, y] : steps) {
        if (x >= horizon) break;
        area += prev_y * (std::max(x, prev_x) - prev_x);
        prev_x = std::max(x, prev_x);
        prev_y = y;
    }
    area += prev_y * (horizon - prev_x);
    return area;
}

Recomputation recompute(const std::vector<Interaction>& log, const oas::ApiModel& api) {
    Recomputation out;
    std::vector<bool> flags(api.operations.size(), false);
    std::size_t covered = 0;
    std::uint64_t requests = 0;
    for (const auto& ix : log) {
        ++requests;
        if (ix.outcome == OutcomeClass::Success2xx && ix.op_index >= 0 &&
            ix.op_index < static_cast<int>(flags.size()) &&
            !flags[static_cast<std::size_t>(ix.op_index)]) {
            flags[static_cast<std::size_t>(ix.op_index)] = true;
            ++covered;
        }
        out.faults.record(ix);
        out.outcome_counts[to_string(ix.outcome)] += 1;
        out.per_request.record(0.0, requests, covered, out.faults.unique_count());
    }
    out.coverage = operation_coverage(log, api);
    return out;
}

json summary_json(const std::vector<Interaction>& log, const oas::ApiModel& api) {
    const Recomputation r = recompute(log, api);

    json flags = json::object();
    for (std::size_t i = 0; i < api.operations.size(); ++i)
        flags[api.operations[i].operation_id] = r.coverage.flags[i];

    json faults = json::array();
    for (const auto& [sig, seq] : r.faults.first_seen()) {
        faults.push_back({{"signature", sig},
                          {"status", r.faults.statuses().at(sig)},
                          {"first_request", seq}});
    }

    const double horizon = static_cast<double>(log.size());
    json j;
    j["version"] = 1;
    j["api_title"] = api.title;
    j["operations"] = api.operations.size();
    j["total_requests"] = log.size();
    j["coverage"] = {{"fraction", r.coverage.fraction},
                     {"covered", r.coverage.covered},
                     {"flags", flags}};
    j["faults"] = faults;
    j["unique_faults"] = r.faults.unique_count();
    j["auc"] = {{"coverage_requests", auc(r.per_request, Metric::OperationsCovered, horizon)},
                {"faults_requests", auc(r.per_request, Metric::UniqueFaults, horizon)}};
    j["outcomes"] = r.outcome_counts;
    return j;
}

}  // namespace restprobe::metrics
