#include "erlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "erlab/errors.hpp"
#include "erlab/numeric.hpp"

namespace erlab {

namespace {

// Fills eta/utility/q_true and every derived scalar from rows that already
// carry (traj, pi, q_theta, likelihood).
void finalize_report(EnumerationReport& report, const HyperParams& hp,
                     std::optional<double> l_base_override) {
    CompensatedSum len_sum;
    for (const TrajectoryRow& row : report.rows) {
        len_sum.add(row.pi * row.traj.length);
    }
    report.l_base = l_base_override.value_or(len_sum.value());

    CompensatedSum marginal_sum;
    for (TrajectoryRow& row : report.rows) {
        row.eta = efficiency_coeff(report.l_base, row.traj.length, hp);
        row.utility = row.likelihood * row.eta;
        marginal_sum.add(row.pi * row.likelihood);
    }
    report.marginal = marginal_sum.value();
    report.e_pi_L = report.marginal;

    for (TrajectoryRow& row : report.rows) {
        row.q_true = report.marginal > 0.0 ? row.pi * row.likelihood / report.marginal : 0.0;
    }

    CompensatedSum e_pi_S, e_q_S, e_q_L;
    for (const TrajectoryRow& row : report.rows) {
        e_pi_S.add(row.pi * row.utility);
        e_q_S.add(row.q_true * row.utility);
        e_q_L.add(row.q_true * row.likelihood);
    }
    report.e_pi_S = e_pi_S.value();
    report.e_q_S = e_q_S.value();
    report.e_q_L = e_q_L.value();

    // Two-pass centered moments; the identity checks assert 1e-12 absolute.
    CompensatedSum var_sum, cov_sum;
    for (const TrajectoryRow& row : report.rows) {
        const double dl = row.likelihood - report.e_pi_L;
        var_sum.add(row.pi * dl * dl);
        cov_sum.add(row.pi * dl * (row.utility - report.e_pi_S));
    }
    report.var_pi_L = var_sum.value();
    report.cov_pi_L_S = cov_sum.value();

    report.log_J = compute_log_J(report);
    report.elbo_true_posterior = compute_elbo(report, SamplingDist::TruePosterior);
    report.elbo_q_theta = compute_elbo(report, SamplingDist::QThetaStream);

    std::vector<double> pi_col, q_true_col, q_theta_col;
    pi_col.reserve(report.rows.size());
    q_true_col.reserve(report.rows.size());
    q_theta_col.reserve(report.rows.size());
    for (const TrajectoryRow& row : report.rows) {
        pi_col.push_back(row.pi);
        q_true_col.push_back(row.q_true);
        q_theta_col.push_back(row.q_theta);
    }
    report.kl_qtrue_pi = kl_divergence(q_true_col, pi_col);
    report.kl_qtheta_pi = kl_divergence(q_theta_col, pi_col);
}

struct EnumerationWalk {
    const PolicyParams& params;
    const Task& task;
    std::vector<OpCode> actions;
    std::vector<TrajectoryRow> rows;

    void emit(int final_value, int non_stop_count, double log_pi, double log_q) {
        TrajectoryRow row;
        row.traj.actions = actions;
        row.traj.final_value = final_value;
        row.traj.length = std::max(1, non_stop_count);
        row.pi = std::exp(log_pi);
        row.q_theta = std::exp(log_q);
        row.likelihood = std::exp(
            answer_log_likelihood_at(task.world, final_value, task.reference_answer));
        rows.push_back(std::move(row));
    }

    // Log-domain accumulation along the prefix keeps deep worlds from
    // underflowing.
    void walk(int value, int depth, double log_pi, double log_q) {
        const WorldConfig& world = task.world;
        const StepDistribution prior =
            step_distribution(params, task, value, Conditioning::prior());
        const StepDistribution posterior = step_distribution(
            params, task, value, Conditioning::posterior(task.reference_answer));
        for (std::size_t a = 0; a < world.op_set.size(); ++a) {
            const OpCode op = world.op_set[a];
            const double lp = log_pi + std::log(prior.probs[a]);
            const double lq = log_q + std::log(posterior.probs[a]);
            actions.push_back(op);
            if (op == OpCode::Stop) {
                emit(value, depth, lp, lq);
            } else {
                const int next = apply_op(value, op);
                if (depth + 1 == world.max_steps) {
                    emit(next, depth + 1, lp, lq);
                } else {
                    walk(next, depth + 1, lp, lq);
                }
            }
            actions.pop_back();
        }
    }
};

} // namespace

std::uint64_t trajectory_space_size(const WorldConfig& config) {
    const auto branch = static_cast<std::uint64_t>(config.op_set.size() - 1);
    std::uint64_t total = 0;
    std::uint64_t pow = 1; // branch^k
    for (int k = 0; k < config.max_steps; ++k) {
        total += pow; // k non-stop actions then Stop
        if (branch != 0 && pow > std::numeric_limits<std::uint64_t>::max() / branch) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        pow *= branch;
    }
    return total + pow; // plus the full-length no-Stop block
}

EnumerationReport enumerate_world(const PolicyParams& params, const Task& task,
                                  const HyperParams& hp, std::uint64_t cap) {
    task.world.validate();
    const std::uint64_t size = trajectory_space_size(task.world);
    if (size > cap) {
        throw CapacityError("trajectory space has " + std::to_string(size) +
                            " trajectories, above the cap of " + std::to_string(cap));
    }
    EnumerationWalk dfs{params, task, {}, {}};
    dfs.rows.reserve(size);
    dfs.walk(task.start_value, 0, 0.0, 0.0);

    EnumerationReport report;
    report.rows = std::move(dfs.rows);
    finalize_report(report, hp, std::nullopt);
    return report;
}

EnumerationReport report_from_tables(std::span<const double> pi,
                                     std::span<const double> likelihoods,
                                     std::span<const double> lengths, const HyperParams& hp,
                                     std::optional<double> l_base,
                                     std::span<const double> q_theta) {
    if (pi.empty() || pi.size() != likelihoods.size() || pi.size() != lengths.size()) {
        throw ConfigError("report_from_tables: tables must be nonempty and equal-sized");
    }
    if (!q_theta.empty() && q_theta.size() != pi.size()) {
        throw ConfigError("report_from_tables: q_theta table size mismatch");
    }
    const double total = compensated_total(pi);
    if (std::abs(total - 1.0) > 1e-6) {
        throw ConfigError("report_from_tables: pi does not sum to 1");
    }
    EnumerationReport report;
    report.rows.resize(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) {
        TrajectoryRow& row = report.rows[i];
        row.pi = pi[i];
        row.q_theta = q_theta.empty() ? pi[i] : q_theta[i];
        row.likelihood = likelihoods[i];
        row.traj.length = static_cast<int>(std::llround(lengths[i]));
        row.traj.final_value = 0;
    }
    finalize_report(report, hp, l_base);
    return report;
}

double check_variance_identity(const EnumerationReport& report) {
    if (!(report.marginal > 0.0)) {
        throw NumericError("variance identity: zero marginal leaves the posterior undefined");
    }
    const double lhs = report.e_q_L - report.e_pi_L;
    const double rhs = report.var_pi_L / report.e_pi_L;
    return std::abs(lhs - rhs);
}

Proposition1Check check_proposition1(const EnumerationReport& report) {
    if (!(report.marginal > 0.0)) {
        throw NumericError("proposition 1: zero marginal leaves the posterior undefined");
    }
    Proposition1Check check;
    check.cov = report.cov_pi_L_S;
    check.gap = report.e_q_S - report.e_pi_S;
    check.identity_residual = std::abs(check.gap - check.cov / report.e_pi_L);
    check.cov_nonnegative = check.cov >= 0.0;
    check.gap_nonnegative = check.gap >= -1e-12;
    check.implication_holds = !check.cov_nonnegative || check.gap_nonnegative;
    return check;
}

double compute_log_J(const EnumerationReport& report) {
    if (report.e_pi_S <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(report.e_pi_S);
}

double compute_elbo(const EnumerationReport& report, SamplingDist dist) {
    CompensatedSum acc;
    double mass = 0.0;
    for (const TrajectoryRow& row : report.rows) {
        const double r = dist == SamplingDist::TruePosterior ? row.q_true : row.q_theta;
        if (r <= 0.0) {
            if (row.pi * row.utility > 0.0) {
                throw NumericError("ELBO sampling distribution lacks support on trajectory '" +
                                   trajectory_to_string(row.traj) + "'");
            }
            continue;
        }
        mass += r;
        acc.add(r * (std::log(row.likelihood) + std::log(row.eta) - std::log(r / row.pi)));
    }
    // a massless sampling distribution (all-zero likelihood world) has no
    // defined expectation; the -inf sentinel keeps the Jensen ordering
    if (mass == 0.0) return -std::numeric_limits<double>::infinity();
    return acc.value();
}

double kl_divergence(std::span<const double> q, std::span<const double> p) {
    if (q.size() != p.size()) throw ConfigError("kl_divergence: table size mismatch");
    CompensatedSum acc;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) continue;
        if (p[i] <= 0.0) return std::numeric_limits<double>::infinity();
        acc.add(q[i] * std::log(q[i] / p[i]));
    }
    return acc.value();
}

NegativeCovarianceInstance construct_negative_covariance_instance(const HyperParams& hp) {
    if (!(hp.alpha >= 1.0)) {
        throw ConfigError("negative-covariance construction requires alpha >= 1");
    }
    // Two dominant paths: stop immediately at 0 (short, near miss) or walk
    // +1 up to 9 and stop (long, exact hit). Equal prior mass on both.
    constexpr double kLongLength = 9.0;
    constexpr double kLBase = 5.0; // 0.5 * 9 + 0.5 * 1
    const double eta_long =
        std::clamp(std::pow(kLBase / kLongLength, hp.alpha), hp.eta_min, hp.eta_max);
    const double eta_short = std::clamp(std::pow(kLBase, hp.alpha), hp.eta_min, hp.eta_max);
    if (!(eta_short > eta_long * (1.0 + 1e-9))) {
        throw ConfigError(
            "negative-covariance construction infeasible: the eta clamp leaves no "
            "short-path utility edge");
    }
    // Likelihood ratio between miss-by-9 and exact hit is exp(-9 kappa) at
    // symmetric grid edges; half the feasibility budget keeps the covariance
    // strictly negative.
    const double kappa = std::log(eta_short / eta_long) / (2.0 * kLongLength);

    WorldConfig world;
    world.start_min = 0;
    world.start_max = 0;
    world.answer_grid.resize(10);
    for (int y = 0; y <= 9; ++y) world.answer_grid[static_cast<std::size_t>(y)] = y;
    world.op_set = {OpCode::Add1, OpCode::Stop};
    world.max_steps = 10;
    world.kappa = kappa;
    world.validate();

    NegativeCovarianceInstance instance;
    instance.task = Task{0, 9, world};
    instance.params = PolicyParams::zeros(world);
    const FeatureLayout& layout = instance.params.layout;
    constexpr double kDecisiveWeight = 12.0;
    for (int v = 1; v <= 8; ++v) {
        instance.params.weights[layout.base_index(v, 0)] = kDecisiveWeight; // keep walking
    }
    instance.params.weights[layout.base_index(9, 1)] = kDecisiveWeight; // stop at the target
    return instance;
}

std::string report_scalars_to_json(const EnumerationReport& report) {
    nlohmann::json doc;
    doc["n_trajectories"] = report.rows.size();
    doc["l_base"] = report.l_base;
    doc["marginal"] = report.marginal;
    doc["e_pi_L"] = report.e_pi_L;
    doc["e_q_L"] = report.e_q_L;
    doc["e_pi_S"] = report.e_pi_S;
    doc["e_q_S"] = report.e_q_S;
    doc["var_pi_L"] = report.var_pi_L;
    doc["cov_pi_L_S"] = report.cov_pi_L_S;
    doc["log_J"] = report.log_J;
    doc["elbo_true_posterior"] = report.elbo_true_posterior;
    doc["elbo_q_theta"] = report.elbo_q_theta;
    doc["kl_q_pi"] = report.kl_qtrue_pi;
    doc["kl_qtheta_pi"] = report.kl_qtheta_pi;
    return doc.dump(2) + "\n";
}

std::string report_table_to_csv(const EnumerationReport& report) {
    std::string out = "trajectory,length,final_value,pi,q_theta,q_true,likelihood,eta,utility\n";
    char buf[64];
    for (const TrajectoryRow& row : report.rows) {
        out += trajectory_to_string(row.traj);
        std::snprintf(buf, sizeof buf, ",%d,%d", row.traj.length, row.traj.final_value);
        out += buf;
        for (double v : {row.pi, row.q_theta, row.q_true, row.likelihood, row.eta, row.utility}) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace erlab
