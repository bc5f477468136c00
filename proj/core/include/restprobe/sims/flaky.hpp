#pragma once

#include "restprobe/sims/sim_api.hpp"

namespace restprobe::sims {

/// Single conversion endpoint that crashes (500) whenever `level` falls
/// outside a sub-range the OAS does not mention. Every crash body carries
/// fresh numbers, so it exercises fault-signature collapsing.
class SimFlaky5xx : public SimApi {
public:
    static constexpr std::int64_t kHiddenLow = 40;
    static constexpr std::int64_t kHiddenHigh = 60;

    explicit SimFlaky5xx(std::uint64_t seed = 0) { (void)seed; }

    std::string name() const override { return "flaky"; }
    std::string openapi_yaml() const override;
    BackendResponse execute(const ConcreteRequest& request) override;
    void reset() override { failures_ = 0; }

private:
    int failures_ = 0;
};

}  // namespace restprobe::sims
