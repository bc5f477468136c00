#include <benchmark/benchmark.h>

#include "restprobe/explorer.hpp"
#include "restprobe/input_generator.hpp"
#include "restprobe/metrics.hpp"
#include "restprobe/oas_model.hpp"
#include "restprobe/rl/ppo.hpp"
#include "restprobe/sims/ecomm.hpp"

namespace {

using namespace restprobe;

void BM_PolicyForward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    DetRng rng(7);
    auto params = rl::PolicyParams::init(n, 64, rng);
    rl::VectorXd obs = rl::VectorXd::Zero(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rl::policy_forward(params, obs));
    }
}
BENCHMARK(BM_PolicyForward)->Arg(3)->Arg(16)->Arg(64);

void BM_PpoUpdate(benchmark::State& state) {
    const int n = 4;
    DetRng rng(7);
    auto params = rl::PolicyParams::init(n, 64, rng);
    rl::PpoConfig cfg;
    rl::RolloutBuffer buffer;
    for (int t = 0; t < 80; ++t) {
        rl::VectorXd obs = rl::VectorXd::Zero(n);
        obs(t % n) = static_cast<double>(t % 20) / 20.0;
        const auto fwd = rl::policy_forward(params, obs);
        const auto a = rl::sample_action(fwd.probabilities, rng);
        buffer.push(obs, a.action, a.log_prob, (t % 5 == 0) ? 1000.0 : -1.0, fwd.value,
                    t == 79);
    }
    for (auto _ : state) {
        auto p = params;
        auto b = buffer;
        rl::compute_gae(b, cfg.gamma, cfg.gae_lambda, 0.0);
        benchmark::DoNotOptimize(rl::ppo_update(p, b, cfg, rng));
    }
}
BENCHMARK(BM_PpoUpdate);

void BM_ParseSpec(benchmark::State& state) {
    sims::SimEComm sim;
    const std::string yaml = sim.openapi_yaml();
    for (auto _ : state) {
        benchmark::DoNotOptimize(oas::parse_spec(yaml, oas::FormatHint::Yaml));
    }
}
BENCHMARK(BM_ParseSpec);

void BM_SimHandle(benchmark::State& state) {
    sims::SimEComm sim;
    ConcreteRequest req;
    req.method = oas::HttpMethod::Get;
    req.path = "/products/search";
    req.query = {{"keyword", "od"}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim.execute(req));
    }
}
BENCHMARK(BM_SimHandle);

void BM_FaultSignature(benchmark::State& state) {
    const std::string body =
        "java.lang.NullPointerException at com.example.Service.handle(Service.java:532)\n"
        "  worker 0x3fa9c2d17b44 job 8812 'request-4431'";
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::fault_signature(500, body));
    }
}
BENCHMARK(BM_FaultSignature);

void BM_ProbabilityMatch(benchmark::State& state) {
    DetRng rng(11);
    std::map<std::string, std::uint64_t> tallies = {
        {"Random", 3}, {"ResponseDictionary", 17}, {"Default", 5}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(probability_match(tallies, 0.1, rng));
    }
}
BENCHMARK(BM_ProbabilityMatch);

}  // namespace

BENCHMARK_MAIN();
