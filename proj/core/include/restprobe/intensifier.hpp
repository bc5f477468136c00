#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "restprobe/input_generator.hpp"
#include "restprobe/interaction.hpp"
#include "restprobe/oas_model.hpp"
#include "restprobe/rand_util.hpp"

namespace restprobe {

/// Nominal mutators keep the request valid against the OAS; error mutators
/// break exactly one constraint (or swap the method).
enum class Mutator {
    // nominal
    AddParameter,
    RemoveParameter,
    RefillValue,
    NumberBoundaries,
    // error
    AddInvalidParameter,
    NumberOutOfBoundaries,
    ChangeHttpMethod,
    MissingRequired,
    WrongType,
    ConstraintsViolation,
};

const char* to_string(Mutator m);
bool is_nominal(Mutator m);

/// All ten operators, four nominal followed by six error ones.
const std::vector<Mutator>& mutation_catalog();

/// One standalone mutation: the operator plus the parameter it targets, or
/// the replacement method for ChangeHttpMethod.
struct MutationTarget {
    Mutator op;
    std::string parameter;                       // empty for ChangeHttpMethod
    std::optional<oas::HttpMethod> new_method;  // set for ChangeHttpMethod
};

/// A mutant in parameter-assignment form, ready for build_request.
struct MutantRequest {
    MutationTarget target;
    oas::HttpMethod method;
    std::map<std::string, json> assignments;
};

struct InapplicableMutation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Enumerates every valid (operator, target) pairing for a successful base
/// request, each parameter at most once per operator.
std::vector<MutationTarget> applicable_mutations(const std::map<std::string, json>& base,
                                                 const oas::OperationSpec& op);

/// Applies exactly one mutation to a copy of the base assignments.
MutantRequest apply_mutation(const std::map<std::string, json>& base, const oas::OperationSpec& op,
                             const MutationTarget& target, DetRng& rng);

/// Drives one intensification burst: shuffles the applicable mutations,
/// executes up to min(budget, cap) of them through the callback and returns
/// the finished interactions. Triggered at most once per operation.
class Intensifier {
public:
    using ExecuteFn = std::function<std::optional<Interaction>(const MutantRequest&)>;

    explicit Intensifier(std::size_t cap = 50) : cap_(cap) {}

    bool triggered(int op_index) const { return triggered_.count(op_index) > 0; }

    /// Returns the executed interactions; empty if this operation was
    /// already intensified. A nullopt from the callback stops the burst
    /// (budget exhausted).
    std::vector<Interaction> intensify(const std::map<std::string, json>& base_assignments,
                                       const oas::OperationSpec& op, DetRng& rng,
                                       const ExecuteFn& execute_mutant);

    std::size_t cap() const { return cap_; }

private:
    std::size_t cap_;
    std::set<int> triggered_;
};

}  // namespace restprobe
