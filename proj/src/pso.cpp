#include "pmcast/pso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmcast/errors.hpp"

namespace pmcast {

void PsoConfig::validate() const {
    if (n_particles < 1) throw ConfigError("pso: n_particles must be >= 1");
    if (generations < 0) throw ConfigError("pso: generations must be >= 0");
    if (phi1 < 0.0 || phi2 < 0.0) throw ConfigError("pso: phi constants must be >= 0");
    if (v_clamp <= 0.0) throw ConfigError("pso: v_clamp must be positive");
    if (eval_budget && *eval_budget < static_cast<std::uint64_t>(n_particles))
        throw ConfigError("pso: eval_budget must cover the initial sweep (>= n_particles)");
}

namespace {

// NaN/-inf break the min bookkeeping; +inf is a legal "worst" score so a
// diverged candidate can be penalized without aborting the swarm.
void check_score(double score, int particle_idx) {
    if (std::isnan(score) || score == -std::numeric_limits<double>::infinity())
        throw NumericError("objective returned " + std::to_string(score) +
                           " for particle " + std::to_string(particle_idx));
}

std::vector<double> evaluate_all(const std::vector<HyperVector>& positions,
                                 const Objective& objective,
                                 const BatchEvaluator* batch_eval) {
    if (batch_eval) return (*batch_eval)(positions);
    std::vector<double> scores;
    scores.reserve(positions.size());
    for (const auto& p : positions) scores.push_back(objective(p));
    return scores;
}

void refresh_gbest(Swarm& s) {
    for (const auto& p : s.particles) {
        if (p.pbest_score < s.gbest_score) {
            s.gbest_score = p.pbest_score;
            s.gbest = p.pbest;
        }
    }
}

Swarm init_swarm_impl(const SearchSpace& space, const PsoConfig& cfg,
                      const Objective& objective, const BatchEvaluator* batch_eval,
                      Rng& rng) {
    cfg.validate();
    Swarm s;
    s.particles.resize(static_cast<std::size_t>(cfg.n_particles));
    std::vector<HyperVector> positions;
    positions.reserve(s.particles.size());
    for (auto& p : s.particles) {
        p.position = sample_uniform(space, rng);
        p.velocity.assign(static_cast<std::size_t>(space.size()), 0.0);
        positions.push_back(p.position);
    }
    const std::vector<double> scores = evaluate_all(positions, objective, batch_eval);
    for (int i = 0; i < cfg.n_particles; ++i) {
        check_score(scores[static_cast<std::size_t>(i)], i);
        auto& p = s.particles[static_cast<std::size_t>(i)];
        p.pbest = p.position;
        p.pbest_score = scores[static_cast<std::size_t>(i)];
        ++s.evaluations;
    }
    // first particle seeds gbest so exact ties resolve to the lowest index
    s.gbest = s.particles.front().pbest;
    s.gbest_score = s.particles.front().pbest_score;
    refresh_gbest(s);
    return s;
}

} // namespace

Swarm init_swarm(const SearchSpace& space, const PsoConfig& cfg, const Objective& objective,
                 Rng& rng) {
    return init_swarm_impl(space, cfg, objective, nullptr, rng);
}

double raw_velocity_component(double v, double x, double pbest, double gbest, double u1,
                              double u2, double inertia) {
    return inertia * v + u2 * (gbest - x) + u1 * (pbest - x);
}

double clamp_velocity_component(double v, double v_clamp) {
    // magnitude clamp, sign preserved; the lower magnitude bound 0 is a no-op
    if (v > v_clamp) return v_clamp;
    if (v < -v_clamp) return -v_clamp;
    return v;
}

void velocity_update(Particle& p, const HyperVector& gbest, const PsoConfig& cfg, Rng& rng) {
    for (int j = 0; j < p.position.size(); ++j) {
        const double u2 = uniform(rng, 0.0, cfg.phi2);
        const double u1 = uniform(rng, 0.0, cfg.phi1);
        const double raw = raw_velocity_component(p.velocity[static_cast<std::size_t>(j)],
                                                  p.position[j], p.pbest[j], gbest[j], u1, u2,
                                                  cfg.inertia);
        p.velocity[static_cast<std::size_t>(j)] = clamp_velocity_component(raw, cfg.v_clamp);
    }
}

void position_update(Particle& p) {
    HyperVector moved = p.position;
    for (int j = 0; j < moved.size(); ++j) moved[j] += p.velocity[static_cast<std::size_t>(j)];
    p.position = clamp(moved);
}

PsoResult optimize(const SearchSpace& space, const PsoConfig& cfg, const Objective& objective,
                   const BatchEvaluator* batch_eval) {
    cfg.validate();
    Rng rng(cfg.seed);
    Swarm s = init_swarm_impl(space, cfg, objective, batch_eval, rng);

    PsoResult res;
    res.trace.push_back(s.gbest_score);
    res.trace_best.push_back(s.gbest);

    const std::uint64_t budget = cfg.eval_budget
                                     ? *cfg.eval_budget
                                     : static_cast<std::uint64_t>(cfg.n_particles) *
                                           (1 + static_cast<std::uint64_t>(cfg.generations));

    for (int gen = 1; gen <= cfg.generations && s.evaluations < budget; ++gen) {
        // barrier step: all bookkeeping is sequential in particle order
        for (auto& p : s.particles) {
            velocity_update(p, s.gbest, cfg, rng);
            position_update(p);
        }
        const int to_eval = static_cast<int>(std::min<std::uint64_t>(
            static_cast<std::uint64_t>(cfg.n_particles), budget - s.evaluations));
        std::vector<HyperVector> positions;
        positions.reserve(static_cast<std::size_t>(to_eval));
        for (int i = 0; i < to_eval; ++i)
            positions.push_back(s.particles[static_cast<std::size_t>(i)].position);
        std::vector<double> scores = evaluate_all(positions, objective, batch_eval);
        for (int i = 0; i < to_eval; ++i) {
            check_score(scores[static_cast<std::size_t>(i)], i);
            auto& p = s.particles[static_cast<std::size_t>(i)];
            if (scores[static_cast<std::size_t>(i)] < p.pbest_score) {
                p.pbest_score = scores[static_cast<std::size_t>(i)];
                p.pbest = p.position;
            }
            ++s.evaluations;
        }
        refresh_gbest(s);
        s.generation = gen;
        res.trace.push_back(s.gbest_score);
        res.trace_best.push_back(s.gbest);
    }

    res.best = s.gbest;
    res.best_score = s.gbest_score;
    res.evaluations = s.evaluations;
    return res;
}

} // namespace pmcast
