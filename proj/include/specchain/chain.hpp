#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "specchain/errors.hpp"
#include "specchain/graph.hpp"
#include "specchain/metrics.hpp"
#include "specchain/proposals.hpp"
#include "specchain/rng.hpp"

namespace specchain {

enum class Algorithm { specrecom, balspecrecom, treerecom };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::specrecom: return "specrecom";
        case Algorithm::balspecrecom: return "balspecrecom";
        case Algorithm::treerecom: return "treerecom";
    }
    return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
    if (name == "specrecom") return Algorithm::specrecom;
    if (name == "balspecrecom") return Algorithm::balspecrecom;
    if (name == "treerecom") return Algorithm::treerecom;
    return std::nullopt;
}

enum class Constraint { connectivity, popdev };

inline std::string_view to_string(Constraint c) {
    return c == Constraint::connectivity ? "connectivity" : "popdev";
}

struct ChainConfig {
    Algorithm algorithm = Algorithm::specrecom;
    std::size_t steps = 0;
    std::size_t k = 0;
    std::uint64_t master_seed = 0;
    /// Balance tolerance for treerecom and for the optional popdev constraint.
    double eps = 0.01;
    std::vector<Constraint> constraints{Constraint::connectivity};
    std::size_t max_attempts_per_step = 1000;
    KernelOptions kernel;

    bool has(Constraint c) const {
        return std::find(constraints.begin(), constraints.end(), c) != constraints.end();
    }

    void validate() const {
        if (k == 0) throw InvalidArgument("chain config: k must be positive");
        if (max_attempts_per_step == 0) throw InvalidArgument("chain config: max_attempts_per_step must be positive");
        if (!(eps >= 0.0)) throw InvalidArgument("chain config: eps must be nonnegative");
        if (!has(Constraint::connectivity))
            throw InvalidArgument("chain config: the connectivity constraint is mandatory");
    }
};

struct EnsembleRecord {
    std::size_t chain_id = 0;
    std::size_t step_index = 0;
    std::size_t cut_edge_count = 0;
    double pop_dev = 0.0;
    std::uint64_t seed_used = 0;
    std::size_t attempts_used = 0;

    bool operator==(const EnsembleRecord&) const = default;
};

struct ConstraintCheck {
    bool passed = true;
    std::string failed;  // name of the first failing constraint

    explicit operator bool() const noexcept { return passed; }
};

inline ConstraintCheck check_constraints(const Graph& g, const Partition& p, const ChainConfig& cfg) {
    for (Constraint c : cfg.constraints) {
        const bool ok = c == Constraint::connectivity ? is_connected_partition(g, p)
                                                      : pop_dev(g, p) <= cfg.eps;
        if (!ok) return {false, std::string(to_string(c))};
    }
    return {};
}

struct ChainResult {
    Partition final_partition;
    std::vector<EnsembleRecord> records;
};

/// Called after every accepted step with the new state.
using StepObserver = std::function<void(const Partition&, const EnsembleRecord&)>;

namespace detail {

inline Proposal propose(const Graph& g, const Partition& p, const ChainConfig& cfg, Rng& rng) {
    switch (cfg.algorithm) {
        case Algorithm::specrecom: return specrecom_step(g, p, rng, cfg.kernel);
        case Algorithm::balspecrecom: return balspecrecom_step(g, p, rng, cfg.kernel);
        case Algorithm::treerecom: return treerecom_step(g, p, cfg.eps, rng);
    }
    throw InvalidArgument("unknown algorithm");
}

}  // namespace detail

/// Runs cfg.steps accepted transitions. Each step redraws proposals until
/// one is a candidate that satisfies every constraint; degenerate proposals
/// and constraint failures both count as attempts. The rng is seeded from
/// cfg.master_seed, so the trajectory is a function of (g, p0, cfg).
inline ChainResult run_chain(const Graph& g, const Partition& p0, const ChainConfig& cfg,
                             std::size_t chain_id = 0, const StepObserver& observer = {}) {
    cfg.validate();
    if (p0.vertex_count() != g.vertex_count())
        throw PreconditionError("initial partition does not match the graph");
    if (p0.k() != cfg.k)
        throw PreconditionError("initial partition has " + std::to_string(p0.k()) + " parts, config expects " +
                                std::to_string(cfg.k));
    if (auto check = check_constraints(g, p0, cfg); !check)
        throw PreconditionError("initial partition violates constraint " + check.failed);
    if (cfg.steps > 0 && p0.k() < 2) throw PreconditionError("chain needs at least two parts");

    Rng rng = make_rng(cfg.master_seed);
    ChainResult out{p0, {}};
    out.records.reserve(cfg.steps);
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        std::string reason;
        std::size_t attempts = 0;
        while (true) {
            if (attempts == cfg.max_attempts_per_step)
                throw StuckChainError("chain " + std::to_string(chain_id) + " stuck at step " +
                                          std::to_string(step) + " after " + std::to_string(attempts) +
                                          " attempts; last rejection: " + reason,
                                      step, reason);
            ++attempts;
            Proposal proposal = detail::propose(g, out.final_partition, cfg, rng);
            if (!proposal.is_candidate()) {
                reason = proposal.diagnostics.reason;
                continue;
            }
            Partition next = apply_proposal(g, out.final_partition, proposal);
            if (auto check = check_constraints(g, next, cfg); !check) {
                reason = "constraint " + check.failed + " failed";
                continue;
            }
            out.final_partition = std::move(next);
            break;
        }
        EnsembleRecord rec{chain_id,
                           step,
                           out.final_partition.cut_edges().size(),
                           pop_dev(g, out.final_partition),
                           cfg.master_seed,
                           attempts};
        out.records.push_back(rec);
        if (observer) observer(out.final_partition, rec);
    }
    return out;
}

enum class EnsembleMode { independent, subsample };

/// One emitted plan of an ensemble.
struct EnsemblePlan {
    Partition partition;
    std::size_t chain_id = 0;
    std::size_t step_index = 0;
    std::uint64_t seed = 0;
    /// Attempts spent on the N steps that produced this plan.
    std::size_t attempts_total = 0;
    std::size_t cut_edges = 0;
    double pop_dev = 0.0;
};

struct EnsembleResult {
    std::vector<EnsemblePlan> plans;
    /// Per-step records ordered by (chain_id, step_index).
    std::vector<EnsembleRecord> records;
};

namespace detail {

[[noreturn]] inline void rethrow_tagged(std::exception_ptr error, const std::string& tag) {
    try {
        std::rethrow_exception(error);
    } catch (const StuckChainError& e) {
        throw StuckChainError(tag + ": " + e.what(), e.step(), e.last_reason());
    } catch (const SolverError& e) {
        throw SolverError(tag + ": " + e.what(), e.residual());
    } catch (const PreconditionError& e) {
        throw PreconditionError(tag + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(tag + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(tag + ": " + e.what());
    }
}

}  // namespace detail

/// Produces m plans. Independent mode runs m chains of cfg.steps steps with
/// seeds mix_seed(master_seed, i), fanned out over `jobs` threads; output
/// order does not depend on `jobs`. Subsample mode runs one chain of
/// m * cfg.steps steps seeded with master_seed and keeps every
/// cfg.steps-th state.
inline EnsembleResult run_ensemble(const Graph& g, const Partition& p0, const ChainConfig& cfg,
                                   std::size_t m, EnsembleMode mode, std::size_t jobs = 1) {
    if (m == 0) throw InvalidArgument("run_ensemble: count must be positive");
    EnsembleResult out;
    if (mode == EnsembleMode::subsample) {
        ChainConfig long_cfg = cfg;
        long_cfg.steps = cfg.steps * m;
        std::size_t window_attempts = 0;
        auto keep = [&](const Partition& state, const EnsembleRecord& rec) {
            window_attempts += rec.attempts_used;
            if (cfg.steps > 0 && rec.step_index % cfg.steps == 0) {
                out.plans.push_back({state, 0, rec.step_index, cfg.master_seed, window_attempts,
                                     rec.cut_edge_count, rec.pop_dev});
                window_attempts = 0;
            }
        };
        ChainResult chain;
        try {
            chain = run_chain(g, p0, long_cfg, 0, keep);
        } catch (...) {
            detail::rethrow_tagged(std::current_exception(),
                                   "sample " + std::to_string(out.plans.size()));
        }
        if (cfg.steps == 0)
            for (std::size_t i = 0; i < m; ++i)
                out.plans.push_back({p0, 0, 0, cfg.master_seed, 0, p0.cut_edges().size(), pop_dev(g, p0)});
        out.records = std::move(chain.records);
        return out;
    }

    std::vector<std::optional<ChainResult>> results(m);
    std::vector<std::exception_ptr> errors(m);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < m; i = next++) {
            ChainConfig chain_cfg = cfg;
            chain_cfg.master_seed = mix_seed(cfg.master_seed, i);
            try {
                results[i] = run_chain(g, p0, chain_cfg, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    jobs = std::clamp<std::size_t>(jobs, 1, m);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < m; ++i)
        if (errors[i]) detail::rethrow_tagged(errors[i], "chain " + std::to_string(i));

    for (std::size_t i = 0; i < m; ++i) {
        auto& r = *results[i];
        std::size_t attempts = 0;
        for (const auto& rec : r.records) attempts += rec.attempts_used;
        const std::uint64_t seed = mix_seed(cfg.master_seed, i);
        out.plans.push_back({r.final_partition, i, cfg.steps, seed, attempts,
                             r.final_partition.cut_edges().size(), pop_dev(g, r.final_partition)});
        out.records.insert(out.records.end(), r.records.begin(), r.records.end());
    }
    return out;
}

}  // namespace specchain
