#include "core/scenarios.hpp"

#include <cmath>

#include "core/collapse.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace epf
{

void ParameterBox::validate() const
{
    require(static_cast<int>(bounds.size()) == param_count(model), ErrorCode::InvalidArgument,
            "ParameterBox: expected " + std::to_string(param_count(model)) + " bound pairs for " + model_name(model));
    for (const auto& [lo, hi] : bounds) {
        require(lo <= hi, ErrorCode::InvalidArgument, "ParameterBox: lower bound exceeds upper bound");
        require(lo >= 0.0, ErrorCode::InvalidArgument, "ParameterBox: negative parameter bound");
    }
    require(population > 0.0, ErrorCode::InvalidArgument, "ParameterBox: population must be positive");
    require(e0_bounds.first >= 0.0 && e0_bounds.first <= e0_bounds.second, ErrorCode::InvalidArgument,
            "ParameterBox: invalid e0 bounds");
    require(i0_bounds.first >= 0.0 && i0_bounds.first <= i0_bounds.second, ErrorCode::InvalidArgument,
            "ParameterBox: invalid i0 bounds");

    if (model == DetailedModel::SEI5CHRD) {
        using namespace sei5chrd;
        for (int p : {p_a, p_ps, p_ms, p_ss, p_C}) {
            require(bounds[p].second <= 1.0, ErrorCode::InvalidArgument,
                    "ParameterBox: probability bound for " + param_names()[p] + " exceeds 1");
        }
        // The simplex constraint p_ss = 1 - p_ps - p_ms must be reachable.
        // The slack absorbs round-off so exact-boundary (degenerate) boxes
        // stay feasible.
        double lo = 1.0 - bounds[p_ps].second - bounds[p_ms].second;
        double hi = 1.0 - bounds[p_ps].first - bounds[p_ms].first;
        require(hi >= bounds[p_ss].first - 1e-9 && lo <= bounds[p_ss].second + 1e-9, ErrorCode::InvalidArgument,
                "ParameterBox: severity-split simplex is unreachable within the p_ss bounds");
    }
    else {
        using namespace se2iur;
        require(bounds[nu].second <= 1.0, ErrorCode::InvalidArgument, "ParameterBox: probability bound for nu exceeds 1");
    }
}

std::vector<DetailedParams> sample_parameters(const ParameterBox& box, int count, std::uint64_t seed)
{
    box.validate();
    require(count >= 1, ErrorCode::InvalidArgument, "sample_parameters: count must be >= 1");

    Rng rng(seed);
    std::vector<DetailedParams> out;
    out.reserve(count);
    const int simplex_attempts = 10000;

    for (int k = 0; k < count; ++k) {
        DetailedParams p;
        p.model = box.model;
        p.mu.resize(box.bounds.size());
        for (std::size_t j = 0; j < box.bounds.size(); ++j) {
            p.mu[j] = rng.uniform(box.bounds[j].first, box.bounds[j].second);
        }
        if (box.model == DetailedModel::SEI5CHRD) {
            using namespace sei5chrd;
            int attempt = 0;
            for (;; ++attempt) {
                require(attempt < simplex_attempts, ErrorCode::InvalidArgument,
                        "sample_parameters: could not satisfy p_ps + p_ms + p_ss = 1 within the box");
                double ss = 1.0 - p.mu[p_ps] - p.mu[p_ms];
                if (ss >= box.bounds[p_ss].first - 1e-9 && ss <= box.bounds[p_ss].second + 1e-9) {
                    p.mu[p_ss] = ss;
                    break;
                }
                p.mu[p_ps] = rng.uniform(box.bounds[p_ps].first, box.bounds[p_ps].second);
                p.mu[p_ms] = rng.uniform(box.bounds[p_ms].first, box.bounds[p_ms].second);
            }
        }

        double e0 = rng.uniform(box.e0_bounds.first, box.e0_bounds.second);
        double i0 = rng.uniform(box.i0_bounds.first, box.i0_bounds.second);
        p.u0.assign(compartment_count(box.model), 0.0);
        if (box.model == DetailedModel::SEI5CHRD) {
            using namespace sei5chrd;
            p.u0[E] = e0;
            p.u0[Ip] = i0;
            p.u0[S] = box.population - e0 - i0;
        }
        else {
            using namespace se2iur;
            p.u0[E1] = e0;
            p.u0[I] = i0;
            p.u0[S] = box.population - e0 - i0;
        }
        p.validate();
        out.push_back(std::move(p));
    }
    return out;
}

ScenarioSet build_training_set(const std::vector<DetailedParams>& params, const TimeGrid& grid, int jobs,
                               double substep)
{
    require(!params.empty(), ErrorCode::InvalidArgument, "build_training_set: no parameter vectors");

    int K = static_cast<int>(params.size());
    std::vector<std::vector<double>> betas(K), gammas(K);
    std::vector<char> ok(K, 0);

    parallel_for(K, jobs, [&](int k) {
        DetailedTrajectory traj = simulate_detailed(params[k], grid, substep);
        CollapsedTriple col = collapse_trajectory(traj);
        double threshold = 1e-9 * col.population;
        for (double v : col.i) {
            if (v < threshold) {
                return; // degenerate; dropped and counted by the gather loop
            }
        }
        CollapseDerivatives der = collapse_derivatives(traj, params[k].mu);
        auto [beta, gamma] = recover_rates(col, &der);
        betas[k] = std::move(beta.values);
        gammas[k] = std::move(gamma.values);
        ok[k] = 1;
    });

    ScenarioSet out;
    out.grid = grid;
    for (int k = 0; k < K; ++k) {
        if (!ok[k]) {
            ++out.dropped;
            continue;
        }
        out.betas.push_back(std::move(betas[k]));
        out.gammas.push_back(std::move(gammas[k]));
        out.provenance.push_back(params[k]);
    }
    require(out.count() >= 1, ErrorCode::Degenerate, "build_training_set: every scenario degenerated");
    return out;
}

ScenarioSet concatenate(const ScenarioSet& base, const ScenarioSet& extra)
{
    require(base.grid == extra.grid, ErrorCode::InvalidArgument, "concatenate: scenario grids differ");
    ScenarioSet out = base;
    out.betas.insert(out.betas.end(), extra.betas.begin(), extra.betas.end());
    out.gammas.insert(out.gammas.end(), extra.gammas.begin(), extra.gammas.end());
    out.provenance.insert(out.provenance.end(), extra.provenance.begin(), extra.provenance.end());
    out.dropped += extra.dropped;
    return out;
}

} // namespace epf
