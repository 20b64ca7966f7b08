#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "erlab/policy.hpp"
#include "erlab/scoring.hpp"

namespace erlab {

/// One row of the exact trajectory table.
struct TrajectoryRow {
    Trajectory traj;
    double pi = 0.0;         // prior probability pi(z | x)
    double q_theta = 0.0;    // posterior-stream probability q_theta(z | x, y*)
    double q_true = 0.0;     // Bayes posterior pi(z) L(z) / marginal
    double likelihood = 0.0; // L(z) = P(y* | x, z)
    double eta = 0.0;        // clamped (l_base / L_z)^alpha
    double utility = 0.0;    // S(z) = L(z) * eta(z)
};

/// Exact enumeration of the full trajectory space with every derived
/// quantity the identity checks need. Inside the oracle, eta uses the exact
/// expected prior length as l_base (the quantity the sampled batch mean
/// estimates), so all identities are deterministic.
struct EnumerationReport {
    std::vector<TrajectoryRow> rows;
    double l_base = 0.0;

    double marginal = 0.0;   // P(y* | x) = E_pi[L]
    double e_pi_L = 0.0;
    double e_q_L = 0.0;      // E over the Bayes posterior
    double e_pi_S = 0.0;
    double e_q_S = 0.0;
    double var_pi_L = 0.0;
    double cov_pi_L_S = 0.0;

    double log_J = 0.0;              // log E_pi[S]
    double elbo_true_posterior = 0.0;
    double elbo_q_theta = 0.0;
    double kl_qtrue_pi = 0.0;        // the KL term of the bound
    double kl_qtheta_pi = 0.0;       // gap between the two sampling choices
};

/// Number of distinct trajectories of the world; computable without
/// enumerating.
std::uint64_t trajectory_space_size(const WorldConfig& config);

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Exhaustively enumerates the trajectory space in lexicographic action
/// order and fills the full report. Throws CapacityError (with the size
/// estimate) when the space exceeds cap.
EnumerationReport enumerate_world(const PolicyParams& params, const Task& task,
                                  const HyperParams& hp,
                                  std::uint64_t cap = kDefaultEnumerationCap);

/// Builds a report directly from hand-specified tables (probabilities,
/// likelihoods, lengths). l_base defaults to the exact expected length under
/// pi; q_theta defaults to pi. Lets the identity checks run on worlds small
/// enough to verify by hand.
EnumerationReport report_from_tables(std::span<const double> pi,
                                     std::span<const double> likelihoods,
                                     std::span<const double> lengths,
                                     const HyperParams& hp,
                                     std::optional<double> l_base = std::nullopt,
                                     std::span<const double> q_theta = {});

/// | (E_q[L] - E_pi[L]) - Var_pi(L) / E_pi[L] |. The left side is computed
/// from the posterior table, the right from the prior table, so the two
/// routes are independent. Throws NumericError when the marginal is zero
/// (undefined posterior).
double check_variance_identity(const EnumerationReport& report);

struct Proposition1Check {
    double cov = 0.0;                 // Cov_pi(L, S)
    double gap = 0.0;                 // E_q[S] - E_pi[S]
    double identity_residual = 0.0;   // | gap - cov / E_pi[L] |
    bool cov_nonnegative = false;
    bool gap_nonnegative = false;     // gap >= -1e-12
    // The proposition's implication: cov >= 0 must force gap >= 0. False
    // only on a genuine violation; negative-cov worlds are the boundary
    // case where the proposition makes no claim.
    bool implication_holds = false;
};

Proposition1Check check_proposition1(const EnumerationReport& report);

/// log E_pi[S]; -infinity when the expected utility is exactly zero.
double compute_log_J(const EnumerationReport& report);

enum class SamplingDist { TruePosterior, QThetaStream };

/// E_r[log L + log eta] - KL(r || pi) for the chosen sampling distribution r.
/// Jensen guarantees the result never exceeds compute_log_J(report).
/// Throws NumericError when r lacks support where pi(z) S(z) > 0.
double compute_elbo(const EnumerationReport& report, SamplingDist dist);

/// sum_z q log(q / p) over aligned tables; +infinity when q puts mass where
/// p has none.
double kl_divergence(std::span<const double> q, std::span<const double> p);

struct NegativeCovarianceInstance {
    Task task;
    PolicyParams params;
};

/// A reproducible world where correct-but-long competes with
/// near-correct-but-short strongly enough that Cov_pi(L, S) < 0 and the
/// posterior loses its expected-utility advantage. Requires hp.alpha >= 1;
/// throws ConfigError when the eta clamp leaves no room for the pattern.
NegativeCovarianceInstance construct_negative_covariance_instance(const HyperParams& hp);

/// JSON scalars / CSV table serializations used by the verify subcommand.
std::string report_scalars_to_json(const EnumerationReport& report);
std::string report_table_to_csv(const EnumerationReport& report);

} // namespace erlab
