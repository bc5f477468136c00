// Acceptance suite: every release criterion with its tolerance pinned in
// code. Prints one PASS/FAIL line per criterion and exits non-zero if any
// fail. Experiment seeds are fixed at 1..10 and never re-picked.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "restprobe/explorer.hpp"
#include "restprobe/input_generator.hpp"
#include "restprobe/intensifier.hpp"
#include "restprobe/metrics.hpp"
#include "restprobe/oas_model.hpp"
#include "restprobe/rl/ppo.hpp"
#include "restprobe/session.hpp"
#include "restprobe/sims/flaky.hpp"
#include "restprobe/sims/sim_api.hpp"

using namespace restprobe;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    Outcome* outcome;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            outcome->pass = false;
            if (!outcome->detail.empty()) outcome->detail += "; ";
            outcome->detail += what;
        }
    }
    void note(const std::string& what) {
        if (!outcome->detail.empty()) outcome->detail += "; ";
        outcome->detail += what;
    }
};

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------- criterion 1

Outcome reward_and_transition_conformance() {
    Outcome out;
    Check c{&out};

    StateObservation fresh(3);
    StateObservation seen(3);
    seen.counters = {0, 1, 0};
    c.require(compute_reward(seen, 0, OutcomeClass::Success2xx) == 1000.0,
              "first success must pay +1000");
    c.require(compute_reward(seen, 1, OutcomeClass::Success2xx) == -100.0,
              "repeat success must pay -100");
    c.require(compute_reward(fresh, 2, OutcomeClass::ClientError4xx) == -1.0,
              "4xx must pay -1");
    c.require(compute_reward(seen, 0, OutcomeClass::ServerError5xx) == -1.0, "5xx must pay -1");
    c.require(compute_reward(seen, 0, OutcomeClass::TransportError) == -1.0,
              "transport errors must pay -1");

    auto inc = transition(seen, 0, OutcomeClass::Success2xx);
    c.require(inc.observation.counters == std::vector<int>{1, 1, 0}, "success must increment");
    auto rej = transition(seen, 2, OutcomeClass::ClientError4xx);
    c.require(rej.observation.counters == seen.counters, "failures must not move the state");

    StateObservation capped(3);
    capped.counters = {20, 0, 0};
    auto sat = transition(capped, 0, OutcomeClass::Success2xx);
    c.require(sat.observation.counters == capped.counters && sat.cap_hit,
              "the 21st success must saturate and truncate");

    // the episode loop honors the cap end to end
    DetRng init(1);
    auto params = rl::PolicyParams::init(2, 16, init);
    DetRng rng(2);
    Explorer explorer(2, params, rng);
    const auto episode = explorer.run_episode(
        [](int op) { return op == 0 ? OutcomeClass::Success2xx : OutcomeClass::ClientError4xx; });
    c.require(episode.truncated, "21 successes of one operation must truncate the episode");
    c.require(episode.final_observation.counters[0] == 20, "cap is 20");
    return out;
}

// ---------------------------------------------------------------- criterion 2

Outcome probability_matching_frequencies() {
    Outcome out;
    Check c{&out};
    const std::map<std::string, std::uint64_t> tallies = {{"majority", 8}, {"minority", 2}};
    const int draws = 20000;

    DetRng rng(1001);
    int hits = 0;
    for (int i = 0; i < draws; ++i)
        if (probability_match(tallies, 0.0, rng) == "majority") ++hits;
    const double greedy = static_cast<double>(hits) / draws;
    c.require(greedy >= 0.78 && greedy <= 0.82,
              "eps=0 frequency " + fmt(greedy) + " outside [0.78, 0.82]");

    hits = 0;
    for (int i = 0; i < draws; ++i)
        if (probability_match(tallies, 0.1, rng) == "majority") ++hits;
    const double eps_greedy = static_cast<double>(hits) / draws;
    c.require(eps_greedy >= 0.75 && eps_greedy <= 0.79,
              "eps=0.1 frequency " + fmt(eps_greedy) + " outside [0.75, 0.79]");
    c.note("freq(eps=0)=" + fmt(greedy) + " freq(eps=0.1)=" + fmt(eps_greedy));
    return out;
}

// ---------------------------------------------------------------- criterion 3

std::vector<double> gae_oracle(const rl::RolloutBuffer& buffer, double gamma, double lambda,
                               double bootstrap) {
    const auto n = buffer.size();
    std::vector<double> adv(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double factor = 1.0;
        for (std::size_t k = t; k < n; ++k) {
            double next_value;
            if (k + 1 == n) next_value = bootstrap;
            else if (buffer.episode_ends[k]) next_value = 0.0;
            else next_value = buffer.values[k + 1];
            adv[t] += factor * (buffer.rewards[k] + gamma * next_value - buffer.values[k]);
            if (buffer.episode_ends[k]) break;
            factor *= gamma * lambda;
        }
    }
    return adv;
}

Outcome ppo_correctness() {
    Outcome out;
    Check c{&out};

    // analytic gradients against central finite differences, toy net n=3 H=4
    DetRng init(777);
    auto params = rl::PolicyParams::init(3, 4, init);
    for (auto& w : params.policy.weights) w *= 5.0;  // spread the logits

    rl::MiniBatch batch;
    DetRng rng(4242);
    for (int i = 0; i < 6; ++i) {
        rl::VectorXd obs(3);
        for (int k = 0; k < 3; ++k) obs(k) = rng.uniform(0, 1);
        const auto fwd = rl::policy_forward(params, obs);
        const int action = static_cast<int>(rng.range(0, 2));
        batch.observations.push_back(obs);
        batch.actions.push_back(action);
        batch.old_log_probs.push_back(std::log(fwd.probabilities(action)) + rng.uniform(-0.3, 0.3));
        batch.advantages.push_back(rng.uniform(-2, 2));
        batch.returns.push_back(rng.uniform(-1, 1));
    }
    rl::PpoConfig cfg;
    cfg.value_coef = 0.5;
    cfg.entropy_coef = 0.01;

    auto pg = params.policy.zero_grads();
    auto vg = params.value.zero_grads();
    rl::ppo_loss_and_grads(params, batch, cfg, pg, vg);

    double max_rel = 0.0;
    const auto fd_check = [&](rl::Mlp& net, const rl::Mlp::Grads& grads) {
        auto flat = net.flatten();
        std::vector<double> analytic;
        for (const auto& w : grads.weights)
            for (int j = 0; j < w.cols(); ++j)
                for (int i = 0; i < w.rows(); ++i) analytic.push_back(w(i, j));
        for (const auto& b : grads.biases)
            for (int i = 0; i < b.size(); ++i) analytic.push_back(b(i));
        const double h = 1e-5;
        for (std::size_t k = 0; k < flat.size(); ++k) {
            const double saved = flat[k];
            flat[k] = saved + h;
            net.unflatten(flat);
            const double up = rl::ppo_loss(params, batch, cfg).total;
            flat[k] = saved - h;
            net.unflatten(flat);
            const double down = rl::ppo_loss(params, batch, cfg).total;
            flat[k] = saved;
            net.unflatten(flat);
            const double fd = (up - down) / (2 * h);
            max_rel = std::max(max_rel, std::abs(fd - analytic[k]) /
                                            std::max({std::abs(fd), std::abs(analytic[k]), 1e-6}));
        }
    };
    fd_check(params.policy, pg);
    fd_check(params.value, vg);
    c.require(max_rel < 1e-4, "max gradient relative error " + fmt(max_rel) + " >= 1e-4");

    // GAE equals the brute-force expansion on every synthetic buffer length <= 8
    DetRng grng(0xFEED);
    double worst = 0.0;
    for (std::size_t len = 1; len <= 8; ++len) {
        for (int trial = 0; trial < 250; ++trial) {
            rl::RolloutBuffer buf;
            for (std::size_t t = 0; t < len; ++t)
                buf.push(rl::VectorXd::Zero(1), 0, 0.0, grng.uniform(-5, 5), grng.uniform(-2, 2),
                         t + 1 == len ? true : grng.coin());
            const double gamma = grng.uniform(0.1, 1.0);
            const double lambda = grng.uniform(0.0, 1.0);
            const double bootstrap = grng.uniform(-3, 3);
            const auto expect = gae_oracle(buf, gamma, lambda, bootstrap);
            rl::compute_gae(buf, gamma, lambda, bootstrap);
            for (std::size_t t = 0; t < len; ++t)
                worst = std::max(worst, std::abs(buf.advantages[t] - expect[t]));
        }
    }
    c.require(worst < 1e-12, "GAE deviates from brute force by " + fmt(worst));
    c.note("max_grad_rel_err=" + fmt(max_rel) + " max_gae_err=" + fmt(worst));
    return out;
}

// ------------------------------------------------------- criteria 4, 5 and 6

struct ExperimentRun {
    std::size_t covered = 0;
    std::size_t operations = 0;
    double coverage_auc = 0.0;           // request-indexed, horizon = budget
    std::uint64_t last_op_first_success; // censored at budget + 1
    std::uint64_t rd_lrd_tally = 0;      // productid source tallies
    std::uint64_t random_tally = 0;
};

ExperimentRun run_experiment(const std::string& sim, std::uint64_t budget, std::uint64_t seed,
                             ExplorerMode mode) {
    SessionConfig cfg;
    cfg.sim = sim;
    cfg.request_budget = budget;
    cfg.seed = seed;
    cfg.explorer_mode = mode;
    const auto report = run_session(cfg);

    ExperimentRun out;
    out.operations = report.api.operations.size();
    out.covered = report.coverage.covered;
    const auto rec = metrics::recompute(report.log, report.api);
    out.coverage_auc = metrics::auc(rec.per_request, metrics::Metric::OperationsCovered,
                                    static_cast<double>(budget));
    out.last_op_first_success = budget + 1;
    const int last_op = static_cast<int>(report.api.operations.size()) - 1;
    for (const auto& ix : report.log) {
        if (ix.op_index == last_op && ix.outcome == OutcomeClass::Success2xx) {
            out.last_op_first_success = ix.sequence;
            break;
        }
    }
    const auto key = ExperienceStore::agent_key("productid", "source");
    out.rd_lrd_tally = report.experience.tally(key, "ResponseDictionary") +
                       report.experience.tally(key, "LastResponseDictionary");
    out.random_tally = report.experience.tally(key, "Random");
    return out;
}

std::vector<std::uint64_t> fixed_seeds() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

struct EcommExperiment {
    std::vector<ExperimentRun> ppo, uniform;
};

const EcommExperiment& ecomm_experiment() {
    static const EcommExperiment runs = [] {
        EcommExperiment e;
        for (const auto seed : fixed_seeds()) {
            e.ppo.push_back(run_experiment("ecomm", 1500, seed, ExplorerMode::Ppo));
            e.uniform.push_back(run_experiment("ecomm", 1500, seed, ExplorerMode::Uniform));
        }
        return e;
    }();
    return runs;
}

Outcome implicit_dependency_learning() {
    Outcome out;
    Check c{&out};
    const auto& e = ecomm_experiment();

    int full = 0;
    double ppo_auc = 0.0, uni_auc = 0.0;
    for (std::size_t i = 0; i < e.ppo.size(); ++i) {
        if (e.ppo[i].covered == 3) ++full;
        ppo_auc += e.ppo[i].coverage_auc / 10.0;
        uni_auc += e.uniform[i].coverage_auc / 10.0;
    }
    c.require(full >= 8, "full coverage in only " + std::to_string(full) + "/10 seeds");
    c.require(uni_auc < ppo_auc, "uniform ablation mean AUC " + fmt(uni_auc) +
                                     " not strictly below PPO " + fmt(ppo_auc));
    c.note("coverage " + std::to_string(full) + "/10, mean coverage AUC ppo=" + fmt(ppo_auc) +
           " uniform=" + fmt(uni_auc));
    return out;
}

Outcome chain_learning() {
    Outcome out;
    Check c{&out};
    int reached = 0;
    double ppo_first = 0.0, uni_first = 0.0;
    for (const auto seed : fixed_seeds()) {
        const auto ppo = run_experiment("chain4", 6000, seed, ExplorerMode::Ppo);
        const auto uni = run_experiment("chain4", 6000, seed, ExplorerMode::Uniform);
        if (ppo.last_op_first_success <= 6000) ++reached;
        ppo_first += static_cast<double>(ppo.last_op_first_success) / 10.0;
        uni_first += static_cast<double>(uni.last_op_first_success) / 10.0;
    }
    c.require(reached >= 7, "stage-4 success in only " + std::to_string(reached) + "/10 seeds");
    c.require(ppo_first < uni_first,
              "mean first-success index ppo=" + fmt(ppo_first) + " not strictly below uniform=" +
                  fmt(uni_first));
    c.note("stage-4 " + std::to_string(reached) + "/10, mean first-success ppo=" +
           fmt(ppo_first) + " uniform=" + fmt(uni_first));
    return out;
}

Outcome input_source_learning() {
    Outcome out;
    Check c{&out};
    int learned = 0;
    for (const auto& run : ecomm_experiment().ppo)
        if (run.rd_lrd_tally > run.random_tally) ++learned;
    c.require(learned >= 8, "response-dictionary sources above Random in only " +
                                std::to_string(learned) + "/10 seeds");
    c.note("productid source learning in " + std::to_string(learned) + "/10 seeds");
    return out;
}

// ---------------------------------------------------------------- criterion 7

oas::Schema random_param_schema(DetRng& rng) {
    oas::Schema s;
    switch (rng.range(0, 3)) {
        case 0:
            s.kind = oas::SchemaKind::String;
            if (rng.coin()) s.min_length = static_cast<std::size_t>(rng.range(1, 3));
            if (rng.coin())
                s.max_length = s.min_length.value_or(1) + static_cast<std::size_t>(rng.range(0, 6));
            break;
        case 1:
            s.kind = oas::SchemaKind::Integer;
            if (rng.coin()) s.minimum = static_cast<double>(rng.range(-20, 0));
            if (rng.coin()) s.maximum = static_cast<double>(rng.range(1, 50));
            break;
        case 2:
            s.kind = oas::SchemaKind::Boolean;
            break;
        default:
            s.kind = oas::SchemaKind::Array;
            s.items = std::make_shared<oas::Schema>();
            s.items->kind = oas::SchemaKind::Integer;
            s.items->minimum = 0;
            s.items->maximum = 9;
            if (rng.coin()) s.min_items = static_cast<std::size_t>(rng.range(0, 1));
            if (rng.coin())
                s.max_items = s.min_items.value_or(0) + static_cast<std::size_t>(rng.range(1, 4));
            break;
    }
    return s;
}

Outcome mutation_validity() {
    Outcome out;
    Check c{&out};

    const auto& catalog = mutation_catalog();
    int nominal = 0;
    for (const auto m : catalog)
        if (is_nominal(m)) ++nominal;
    c.require(catalog.size() == 10, "catalog must hold 10 operators");
    c.require(nominal == 4 && catalog.size() - nominal == 6, "catalog must split 4 nominal / 6 error");

    const auto contract_ok = [](const MutantRequest& mutant, const oas::OperationSpec& op) {
        for (const auto& p : op.parameters) {
            const auto it = mutant.assignments.find(p.name);
            if (it == mutant.assignments.end()) {
                if (p.required) return false;
                continue;
            }
            if (!oas::validate_against_schema(it->second, p.schema).valid) return false;
        }
        return true;
    };

    DetRng rng(0xACCE);
    std::size_t pairs = 0, mutants = 0;
    while (pairs < 1000) {
        oas::OperationSpec op;
        op.index = 0;
        op.operation_id = "op";
        op.method = oas::kMethodOrder[rng.range(0, 4)];
        op.path = "/x";
        const auto nparams = rng.range(1, 4);
        for (std::int64_t i = 0; i < nparams; ++i) {
            oas::ParameterSpec p;
            p.name = "p" + std::to_string(i);
            p.normalized_name = p.name;
            p.required = rng.coin();
            p.schema = random_param_schema(rng);
            op.parameters.push_back(std::move(p));
        }
        std::map<std::string, json> base;
        for (const auto& p : op.parameters)
            if (p.required || rng.coin()) base[p.name] = random_value_for_schema(p.schema, rng);
        if (!contract_ok(MutantRequest{{}, op.method, base}, op)) {
            c.require(false, "generated base request is invalid");
            break;
        }
        ++pairs;
        for (const auto& target : applicable_mutations(base, op)) {
            const auto mutant = apply_mutation(base, op, target, rng);
            ++mutants;
            const bool valid = contract_ok(mutant, op) && mutant.method == op.method;
            if (is_nominal(target.op) && !valid) {
                c.require(false, std::string("nominal mutant broke the contract: ") +
                                     to_string(target.op));
            }
            if (!is_nominal(target.op) && valid) {
                c.require(false, std::string("error mutant stayed valid: ") + to_string(target.op));
            }
            if (!out.pass) return out;
        }
    }
    c.note(std::to_string(pairs) + " schema/request pairs, " + std::to_string(mutants) +
           " mutants checked");
    return out;
}

// ---------------------------------------------------------------- criterion 8

Outcome metrics_oracles() {
    Outcome out;
    Check c{&out};

    // coverage vs brute force on 500 random logs
    oas::ApiModel api;
    for (int i = 0; i < 5; ++i) {
        oas::OperationSpec op;
        op.index = i;
        op.operation_id = "op" + std::to_string(i);
        api.operations.push_back(op);
    }
    DetRng rng(0x0C0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Interaction> log;
        const auto len = rng.range(0, 50);
        for (std::int64_t i = 0; i < len; ++i) {
            Interaction ix;
            ix.sequence = static_cast<std::uint64_t>(i + 1);
            ix.op_index = static_cast<int>(rng.range(0, 4));
            const int statuses[] = {200, 201, 400, 404, 500};
            ix.status = statuses[rng.range(0, 4)];
            ix.outcome = classify_status(ix.status);
            log.push_back(ix);
        }
        std::vector<bool> expect(5, false);
        for (std::size_t op = 0; op < 5; ++op)
            for (const auto& ix : log)
                if (ix.op_index == static_cast<int>(op) && ix.status / 100 == 2) expect[op] = true;
        const auto got = metrics::operation_coverage(log, api);
        if (got.flags != expect) {
            c.require(false, "coverage disagrees with the brute-force scan");
            return out;
        }
    }

    // AUC vs a fine-grained Riemann sum
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        metrics::Timeline tl;
        std::uint64_t x = 0;
        std::size_t covered = 0, faults = 0;
        for (int s = 0; s < 6; ++s) {
            x += static_cast<std::uint64_t>(rng.range(1, 9));
            covered += static_cast<std::size_t>(rng.range(0, 2));
            faults += static_cast<std::size_t>(rng.range(0, 1));
            tl.record(0.0, x, covered, faults);
        }
        const double horizon = static_cast<double>(x + 4);
        const double dx = 0.125;
        double riemann = 0.0;
        for (double grid = dx / 2; grid < horizon; grid += dx) {
            double y = 0.0;
            for (const auto& s : tl.samples())
                if (static_cast<double>(s.requests) <= grid)
                    y = static_cast<double>(s.ops_covered);
            riemann += y * dx;
        }
        worst = std::max(worst, std::abs(riemann - metrics::auc(tl, metrics::Metric::OperationsCovered,
                                                                horizon)));
    }
    c.require(worst < 1e-9, "AUC deviates from the Riemann oracle by " + fmt(worst));

    // the flaky sim's digit-varied 5xx bodies collapse to exactly one fault
    sims::SimFlaky5xx flaky;
    metrics::FaultRegistry registry;
    int triggers = 0;
    for (int level = 0; level <= 14; ++level) {
        ConcreteRequest req;
        req.method = oas::HttpMethod::Get;
        req.path = "/tools/convert";
        req.query = {{"level", std::to_string(level)}};
        const auto ix = execute(req, flaky, static_cast<std::uint64_t>(level + 1));
        if (ix.outcome == OutcomeClass::ServerError5xx) {
            ++triggers;
            registry.record(ix);
        }
    }
    c.require(triggers >= 10, "need at least 10 triggering inputs");
    c.require(registry.unique_count() == 1,
              "expected exactly 1 unique fault, got " + std::to_string(registry.unique_count()));
    c.note("auc_err=" + fmt(worst) + ", flaky triggers=" + std::to_string(triggers) +
           " unique=" + std::to_string(registry.unique_count()));
    return out;
}

// ---------------------------------------------------------------- criterion 9

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Outcome determinism_and_replay() {
    Outcome out;
    Check c{&out};
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "restprobe_acceptance";
    fs::remove_all(root);

    SessionConfig cfg;
    cfg.sim = "ecomm";
    cfg.request_budget = 400;
    cfg.seed = 11;
    cfg.out_dir = (root / "a").string();
    run_session(cfg);
    cfg.out_dir = (root / "b").string();
    run_session(cfg);

    const auto a = slurp(root / "a" / "summary.json");
    const auto b = slurp(root / "b" / "summary.json");
    c.require(!a.empty() && a == b, "summary.json differs between identical sessions");

    // offline recomputation from the log alone equals the session's summary
    const auto log = read_interaction_log((root / "a" / "interactions.jsonl").string());
    const auto sim = sims::make_sim("ecomm", 0);
    const auto api = oas::parse_spec(sim->openapi_yaml(), oas::FormatHint::Yaml);
    const auto recomputed = metrics::summary_json(log, api).dump(2) + "\n";
    c.require(recomputed == a, "recomputed summary differs from the session's");

    fs::remove_all(root);
    c.note("summary bytes=" + std::to_string(a.size()));
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"1 reward/transition conformance", reward_and_transition_conformance},
        {"2 probability matching", probability_matching_frequencies},
        {"3 ppo gradient + gae oracles", ppo_correctness},
        {"4 implicit-dependency learning (ecomm)", implicit_dependency_learning},
        {"5 chain learning (chain4)", chain_learning},
        {"6 input-source learning (productid)", input_source_learning},
        {"7 mutation validity", mutation_validity},
        {"8 metrics oracles", metrics_oracles},
        {"9 determinism & replay", determinism_and_replay},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        if (!outcome.pass) ++failures;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << criterion.name;
        if (!outcome.detail.empty()) std::cout << "  [" << outcome.detail << "]";
        std::cout << "\n" << std::flush;
    }
    return failures == 0 ? 0 : 1;
}
