#pragma once

#include <map>
#include <vector>

#include "restprobe/rand_util.hpp"
#include "restprobe/sims/sim_api.hpp"

namespace restprobe::sims {

/// N-stage resource pipeline with a mandatory creation order. Stage k needs
/// a live (not yet consumed) id created by stage k-1 in its request body;
/// creating the stage-k resource consumes that parent id, so every deep
/// resource requires one fresh ancestor per level. Ids are 63-bit random
/// values, hopeless to guess; the OAS documents the parameters but not the
/// ordering or the consume-on-use rule.
class SimChain : public SimApi {
public:
    explicit SimChain(int stages, std::uint64_t seed);

    std::string name() const override;
    std::string openapi_yaml() const override;
    BackendResponse execute(const ConcreteRequest& request) override;
    void reset() override;

    int stages() const { return stages_; }
    static std::string stage_path(int k);
    static std::string id_field(int k);  // "stage<k>Id"

private:
    struct Resource {
        bool consumed = false;
    };

    int stages_;
    std::uint64_t seed_;
    DetRng rng_;
    std::vector<std::map<std::int64_t, Resource>> stores_;
};

}  // namespace restprobe::sims
