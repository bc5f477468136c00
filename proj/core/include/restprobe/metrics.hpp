#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "restprobe/interaction.hpp"
#include "restprobe/oas_model.hpp"

namespace restprobe::metrics {

struct CoverageResult {
    double fraction = 0.0;
    std::size_t covered = 0;
    std::vector<bool> flags;  // per operation index
};

/// An operation counts as covered once it has at least one 2xx interaction.
CoverageResult operation_coverage(const std::vector<Interaction>& log, const oas::ApiModel& api);

/// Normalizes a 5xx body so that messages differing only in volatile content
/// (numbers, hashes, UUIDs, quoted literals) collapse to one signature.
std::string fault_signature(int status, const std::string& body);

/// Unique 5xx signatures and the request that first triggered each.
class FaultRegistry {
public:
    /// Returns true when the interaction contributed a new unique fault.
    bool record(const Interaction& interaction);

    std::size_t unique_count() const { return first_seen_.size(); }
    const std::map<std::string, std::uint64_t>& first_seen() const { return first_seen_; }
    const std::map<std::string, int>& statuses() const { return statuses_; }

private:
    std::map<std::string, std::uint64_t> first_seen_;  // signature -> sequence
    std::map<std::string, int> statuses_;
};

struct Sample {
    double elapsed_s = 0.0;
    std::uint64_t requests = 0;
    std::size_t ops_covered = 0;
    std::size_t unique_faults = 0;
};

/// Trend samples, appended after every request and at least every five
/// seconds of wall clock while a session is idle between requests.
class Timeline {
public:
    static constexpr double kPeriodicIntervalS = 5.0;

    void record(double elapsed_s, std::uint64_t requests, std::size_t ops_covered,
                std::size_t unique_faults);
    /// Adds a wall-clock sample when more than the periodic interval has
    /// passed since the last one.
    void maybe_periodic(double elapsed_s);

    const std::vector<Sample>& samples() const { return samples_; }
    bool empty() const { return samples_.empty(); }

    std::string to_csv() const;

private:
    std::vector<Sample> samples_;
    double last_periodic_s_ = 0.0;
};

enum class Abscissa { Requests, WallClock };
enum class Metric { OperationsCovered, UniqueFaults };

/// Area under the step-interpolated metric over [0, horizon]. The metric is
/// zero before the first sample and holds its last value up to the horizon.
double auc(const Timeline& timeline, Metric metric, double horizon,
           Abscissa abscissa = Abscissa::Requests);

/// Rebuilds coverage flags, fault registry and a request-indexed timeline
/// from a finished interaction log. The session summary and the offline
/// `report` command both derive their numbers through this path.
struct Recomputation {
    CoverageResult coverage;
    FaultRegistry faults;
    Timeline per_request;  // elapsed left at zero: wall clock is not replayable
    std::map<std::string, std::uint64_t> outcome_counts;
};

Recomputation recompute(const std::vector<Interaction>& log, const oas::ApiModel& api);

/// The deterministic, log-recomputable session summary.
json summary_json(const std::vector<Interaction>& log, const oas::ApiModel& api);

}  // namespace restprobe::metrics
