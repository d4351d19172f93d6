#include "nclab/cli.hpp"
#include "nclab/feasibility.hpp"
#include "nclab/generalization.hpp"
#include "nclab/linalg.hpp"
#include "nclab/networks.hpp"
#include "nclab/parallel.hpp"
#include "nclab/probes.hpp"
#include "nclab/random_features.hpp"
#include "nclab/upfm.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <ostream>

namespace nclab::cli {

namespace {

// Stream ids below are fixed so that a given seed always feeds the same draws to the same purpose.
enum StreamId : std::uint64_t { kData = 0, kInit = 1, kTrials = 2, kMonteCarlo = 3, kMeans = 4 };

std::string fmt(double v) { return format_double(v); }
std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

int positive_int(const RunConfig& cfg, const std::string& key, long minimum = 1) {
    const long v = cfg.integer(key);
    if (v < minimum || v > 1'000'000'000L)
        throw ConfigError("[" + cfg.command + "] " + key + " must be at least " + std::to_string(minimum));
    return static_cast<int>(v);
}

upfm::LossKind loss_of(const RunConfig& cfg) {
    return cfg.text("loss") == "ce" ? upfm::LossKind::CrossEntropy : upfm::LossKind::SquaredError;
}

// K x d class means of norm mean_norm: antipodal puts +-e1 on two classes, axes puts e_k on class k,
// angle puts e1 and (cos theta, sin theta) on two classes.
Matrix mean_matrix(const std::string& layout, int K, Index d, double mean_norm, double theta_deg) {
    Matrix Pi = Matrix::Zero(K, d);
    if (layout == "antipodal" || layout == "angle") {
        if (K != 2) throw ConfigError("means = " + layout + " needs K = 2");
        if (layout == "antipodal") {
            Pi(0, 0) = 1.0;
            Pi(1, 0) = -1.0;
        } else {
            if (d < 2) throw ConfigError("means = angle needs d >= 2");
            const double theta = theta_deg * M_PI / 180.0;
            Pi(0, 0) = 1.0;
            Pi(1, 0) = std::cos(theta);
            Pi(1, 1) = std::sin(theta);
        }
    } else {
        if (d < K) throw ConfigError("means = axes needs d >= K");
        for (int k = 0; k < K; ++k) Pi(k, k) = 1.0;
    }
    return mean_norm * Pi;
}

void write_output(const RunConfig& cfg, const std::string& name, const CsvTable& table, std::ostream& log) {
    write_csv(cfg.output_dir / name, table);
    log << "wrote " << (cfg.output_dir / name).string() << "\n";
}

// ---------------------------------------------------------------------------

void run_upfm(const RunConfig& cfg, std::ostream& log) {
    const int n = positive_int(cfg, "n"), K = positive_int(cfg, "K", 2), D = positive_int(cfg, "D");
    const int iters = positive_int(cfg, "numeric_iters", 0);
    const upfm::RegularizationParams reg{cfg.real("lambda_W"), cfg.real("lambda_H")};
    const upfm::LossKind loss = loss_of(cfg);
    const upfm::UpfmSolution sol =
        loss == upfm::LossKind::CrossEntropy ? upfm::ce_closed_form(n, K, reg, D) : upfm::l2_closed_form(n, K, reg, D);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    double numeric_objective = nan, psd = nan, sq = nan, bv = nan;
    std::string converged = "na";
    if (iters > 0) {
        RngStream rng(cfg.seed, kInit);
        upfm::NumericOptions options;
        options.restarts = positive_int(cfg, "numeric_restarts");
        const upfm::NumericResult num = upfm::numeric_minimize(loss, n, K, D, reg, rng, iters, options);
        numeric_objective = num.objective;
        converged = num.converged ? "true" : "false";
    }
    if (loss == upfm::LossKind::CrossEntropy && sol.a > 0.0) {
        const upfm::KktCertificate kkt = upfm::kkt_check_ce(sol, reg);
        psd = kkt.psd_min_eig;
        sq = kkt.sq_norm;
        bv = kkt.bv_inner;
    }
    CsvTable t;
    t.header = {"loss", "n", "K", "D", "lambda_W", "lambda_H", "a", "b", "objective", "numeric_objective",
                "numeric_converged", "kkt_psd_min_eig", "kkt_sq_norm", "kkt_bv_inner"};
    t.rows.push_back({cfg.text("loss"), fmt(n), fmt(K), fmt(D), fmt(reg.lambda_W), fmt(reg.lambda_H), fmt(sol.a),
                      fmt(sol.b), fmt(sol.objective), fmt(numeric_objective), converged, fmt(psd), fmt(sq), fmt(bv)});
    write_output(cfg, "upfm.csv", t, log);
}

// ---------------------------------------------------------------------------

void run_sweep(const RunConfig& cfg, std::ostream& log) {
    feasibility::SweepGrid grid;
    grid.n = positive_int(cfg, "n");
    grid.K = positive_int(cfg, "K", 2);
    grid.trials = positive_int(cfg, "trials");
    grid.all_classes = cfg.flag("all_classes");
    grid.epsilon = cfg.real("epsilon");
    grid.constant_c = cfg.real("constant_c");
    grid.tol = cfg.real("tol");
    for (double ratio : cfg.reals("d_over_n")) {
        if (!(ratio > 0.0)) throw ConfigError("[feasibility-sweep] d_over_n entries must be positive");
        grid.d_values.push_back(std::max<Index>(1, std::lround(ratio * grid.n)));
    }
    grid.sigma_values = cfg.reals("sigma");
    if (grid.d_values.empty() || grid.sigma_values.empty())
        throw ConfigError("[feasibility-sweep] d_over_n and sigma must be nonempty");
    const Index d0 = cfg.text("means") == "axes" ? grid.K : (cfg.text("means") == "angle" ? 2 : 1);
    grid.base_means = mean_matrix(cfg.text("means"), grid.K, d0, cfg.real("mean_norm"), cfg.real("theta_deg"));
    for (Index d : grid.d_values)
        if (d < d0) throw ConfigError("[feasibility-sweep] every d must hold the means");

    const std::vector<feasibility::SweepRow> rows = feasibility::feasibility_sweep(grid, RngStream(cfg.seed, kTrials), cfg.threads);
    CsvTable t;
    t.header = {"d", "n", "K", "sigma", "trials", "successes", "rate", "union_sigma_star", "gordon_min_d_over_n"};
    long failures = 0;
    for (const feasibility::SweepRow& r : rows) {
        failures += r.numerical_failures;
        t.rows.push_back({fmt(static_cast<long>(r.d)), fmt(r.n), fmt(r.K), fmt(r.sigma), fmt(r.trials), fmt(r.successes),
                          fmt(r.rate), fmt(r.union_sigma_star), fmt(r.gordon_min_d_over_n)});
    }
    write_output(cfg, "sweep.csv", t, log);
    if (failures > 0) throw NumericalError("feasibility-sweep: " + std::to_string(failures) + " trials hit a numerical failure");
}

// ---------------------------------------------------------------------------

void run_train(const RunConfig& cfg, std::ostream& log) {
    const int n = positive_int(cfg, "n"), K = positive_int(cfg, "K", 2), d = positive_int(cfg, "d");
    const int depth = positive_int(cfg, "depth", 2);
    if (depth > 3) throw ConfigError("[train] depth must be 2 or 3");
    const long d1 = cfg.integer("d1") > 0 ? cfg.integer("d1") : d;
    const long D = cfg.integer("D") > 0 ? cfg.integer("D") : d;

    GmmSpec spec;
    spec.Pi = mean_matrix(cfg.text("means"), K, d, cfg.real("mean_norm"), 0.0);
    spec.sigma = cfg.real("sigma");
    spec.n = n;
    RngStream data_rng(cfg.seed, kData);
    const GmmSample sample = sample_gmm(spec, data_rng);

    networks::TrainConfig tc;
    tc.loss = loss_of(cfg);
    tc.lambda_W = cfg.real("lambda_W");
    tc.lambda_H = cfg.real("lambda_H");
    tc.lr0 = cfg.real("lr");
    tc.decay_factor = cfg.real("decay_factor");
    tc.epochs = positive_int(cfg, "epochs", 0);
    tc.batch = positive_int(cfg, "batch", 0);
    tc.freeze_first_layer = cfg.flag("freeze_first_layer");
    tc.seed = cfg.seed;
    for (long c : cfg.integers("checkpoints")) tc.extra_checkpoints.push_back(static_cast<int>(c));

    RngStream init_rng(cfg.seed, kInit);
    networks::ShallowNet net = networks::init_network(depth, d, d1, D, K, init_rng, tc.freeze_first_layer);
    const networks::TrainResult result = networks::sgd_train(std::move(net), sample.data, tc);

    CsvTable traj;
    traj.header = {"epoch", "objective", "nc1", "nc2_h", "nc2_w", "nc3"};
    for (const networks::TrajectoryPoint& p : result.trajectory)
        traj.rows.push_back({fmt(p.epoch), fmt(p.objective), fmt(p.metrics.nc1), fmt(p.metrics.nc2_h),
                             fmt(p.metrics.nc2_w), fmt(p.metrics.nc3)});
    write_output(cfg, "trajectory.csv", traj, log);

    CsvTable epochs;
    epochs.header = {"epoch", "mean_batch_objective"};
    for (std::size_t e = 0; e < result.epoch_objective.size(); ++e)
        epochs.rows.push_back({fmt(static_cast<long>(e + 1)), fmt(result.epoch_objective[e])});
    write_output(cfg, "epoch_objective.csv", epochs, log);

    if (cfg.flag("save_weights")) {
        networks::write_weights(cfg.output_dir / "weights.bin", result.net);
        log << "wrote " << (cfg.output_dir / "weights.bin").string() << "\n";
    }
    if (result.aborted) throw NumericalError("train: " + result.diagnostic);
}

// ---------------------------------------------------------------------------

void run_rf(const RunConfig& cfg, std::ostream& log) {
    const int N = positive_int(cfg, "N"), d = positive_int(cfg, "d", 2), trials = positive_int(cfg, "trials");
    const rf::Centering centering =
        cfg.text("centering") == "paper_constant" ? rf::Centering::PaperConstant : rf::Centering::AnalyticReluMean;

    // Gaussian directions are pairwise non-parallel with probability one.
    RngStream data_rng(cfg.seed, kData);
    Matrix X = data_rng.gaussian(d, N);
    X.colwise().normalize();

    const Matrix H = rf::kernel_closed_form(X, centering);
    const double lambda_min = Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double bound = lambda_min > 0.0 ? static_cast<double>(rf::width_bound(X, lambda_min, N, cfg.real("width_constant"))) : nan;

    std::vector<long> widths = cfg.integers("d1");
    if (widths.empty()) widths.push_back(static_cast<long>(std::ceil(8.0 * N * std::log(static_cast<double>(N)))));

    CsvTable t;
    t.header = {"d1", "N", "d", "trials", "full_rank", "rate", "mean_sigma_min", "kernel_lambda_min", "width_bound"};
    const RngStream trial_root(cfg.seed, kTrials);
    for (std::size_t w = 0; w < widths.size(); ++w) {
        if (widths[w] < 1) throw ConfigError("[rf-rank] d1 entries must be positive");
        std::vector<rf::FeatureRank> ranks(static_cast<std::size_t>(trials));
        parallel_for(ranks.size(), [&](std::size_t i) {
            RngStream stream = trial_root.substream(w).substream(i);
            ranks[i] = rf::relu_feature_rank(X, widths[w], stream);
        }, cfg.threads);
        long full = 0;
        double sigma_min = 0.0;
        for (const rf::FeatureRank& r : ranks) {
            full += r.rank == N;
            sigma_min += r.sigma_min / trials;
        }
        t.rows.push_back({fmt(widths[w]), fmt(N), fmt(d), fmt(trials), fmt(full), fmt(static_cast<double>(full) / trials),
                          fmt(sigma_min), fmt(lambda_min), fmt(bound)});
    }
    write_output(cfg, "rf_rank.csv", t, log);

    auto kernel_table = [&](const Matrix& K, const std::string& note) {
        CsvTable k;
        k.comments = {"centering=" + cfg.text("centering"), note};
        for (Index j = 0; j < K.cols(); ++j) k.header.push_back("c" + std::to_string(j));
        for (Index i = 0; i < K.rows(); ++i) {
            std::vector<std::string> row;
            for (Index j = 0; j < K.cols(); ++j) row.push_back(fmt(K(i, j)));
            k.rows.push_back(std::move(row));
        }
        return k;
    };
    write_output(cfg, "kernel.csv", kernel_table(H, "closed_form lambda_min=" + fmt(lambda_min)), log);
    if (const long m = cfg.integer("kernel_mc_samples"); m > 0) {
        const rf::KernelEstimate est = rf::kernel_monte_carlo(X, m, RngStream(cfg.seed, kMonteCarlo), centering, cfg.threads);
        write_output(cfg, "kernel_mc.csv",
                     kernel_table(est.H_hat, "monte_carlo samples=" + fmt(m) + " lambda_min=" + fmt(est.lambda_min_hat)), log);
    }
}

// ---------------------------------------------------------------------------

void run_gen(const RunConfig& cfg, std::ostream& log) {
    const int n = positive_int(cfg, "n"), trials = positive_int(cfg, "trials");
    const long samples = positive_int(cfg, "mc_samples", 2);
    const double mu_norm = cfg.real("mu_norm");
    if (!(mu_norm > 0.0)) throw ConfigError("[gen-analysis] mu_norm must be positive");
    const bool low_noise = cfg.text("regime") == "low_noise";

    CsvTable t;
    t.header = {"n", "d", "sigma_over_mu", "f_star", "upper_error", "lower_error", "mc_error", "mc_ci"};
    const RngStream root(cfg.seed, kTrials);
    std::uint64_t cell = 0;
    for (long d : cfg.integers("d")) {
        if (d < 2) throw ConfigError("[gen-analysis] d entries must be at least 2");
        for (double s : cfg.reals("sigma_over_mu")) {
            if (!(s >= 0.0)) throw ConfigError("[gen-analysis] sigma_over_mu entries must be nonnegative");
            GmmSpec spec;
            spec.Pi = mean_matrix("antipodal", 2, d, mu_norm, 0.0);
            spec.sigma = s * mu_norm;
            spec.n = n;
            const Vector mu = spec.Pi.row(0).transpose();
            const double lower_formula =
                low_noise ? 0.0 : gen::error_lower_formula(s, n, static_cast<double>(d), cfg.real("c1"), cfg.real("c2")).value;
            for (int trial = 0; trial < trials; ++trial) {
                const RngStream trial_rng = root.substream(cell).substream(static_cast<std::uint64_t>(trial));
                RngStream data_rng = trial_rng.substream(0);
                const GmmSample sample = sample_gmm(spec, data_rng);
                gen::TwoNeuronClassifier clf;
                double f_star = 0.0, lower = 0.0;
                if (low_noise) {
                    const gen::MarginReport a = gen::margin_low_noise(sample, 0), b = gen::margin_low_noise(sample, 1);
                    clf = {a.beta_star, b.beta_star};
                    f_star = std::min(a.f_star, b.f_star);
                    lower = 0.5 * (a.lower_error + b.lower_error);
                } else {
                    const gen::MaximizeFResult a = gen::maximize_F(sample, 0), b = gen::maximize_F(sample, 1);
                    clf = {a.beta, b.beta};
                    f_star = std::min(a.f_star, b.f_star);
                    lower = lower_formula;
                }
                const gen::McError mc = gen::monte_carlo_error(clf, mu, spec.sigma, samples, trial_rng.substream(1),
                                                               gen::McMethod::Projected, cfg.threads);
                t.rows.push_back({fmt(n), fmt(d), fmt(s), fmt(f_star), fmt(gen::error_sandwich_center(clf, mu, spec.sigma)),
                                  fmt(lower), fmt(mc.error), fmt(mc.ci)});
            }
            ++cell;
        }
    }
    write_output(cfg, "gen.csv", t, log);
}

// ---------------------------------------------------------------------------

std::string joined(const std::map<std::string, double>& values) {
    std::string out;
    for (const auto& [k, v] : values) out += (out.empty() ? "" : ";") + k + "=" + format_double(v);
    return out;
}

void run_probe(const RunConfig& cfg, std::ostream& log) {
    const std::string kind = cfg.text("kind");
    const long trials = positive_int(cfg, "trials");
    const RngStream rng(cfg.seed, kTrials);
    std::vector<probes::ProbeReport> reports;
    if (kind == "jl_angle") {
        reports.push_back(probes::jl_angle_probe(positive_int(cfg, "d"), positive_int(cfg, "m"), cfg.real("epsilon"), trials,
                                                 rng, cfg.threads));
    } else if (kind == "jl_singular") {
        RngStream means_rng(cfg.seed, kMeans);
        const Matrix Pi = means_rng.gaussian(positive_int(cfg, "K"), positive_int(cfg, "d"));
        reports.push_back(probes::jl_singular_probe(Pi, positive_int(cfg, "m"), cfg.real("epsilon"), trials, rng, cfg.threads));
    } else if (kind == "gordon") {
        reports.push_back(probes::gordon_probe(positive_int(cfg, "n"), positive_int(cfg, "d"), trials, rng, cfg.threads));
    } else {
        reports = probes::lipschitz_concentration_probe(positive_int(cfg, "n"), positive_int(cfg, "d"), trials, rng,
                                                        cfg.reals("t"), cfg.threads);
    }
    CsvTable t;
    t.header = {"probe", "trials", "violations", "empirical_rate", "theoretical_rate_bound", "ci",
                "solver_failures", "passed", "bound_params", "statistics"};
    for (const probes::ProbeReport& r : reports)
        t.rows.push_back({r.probe_name, fmt(r.trials), fmt(r.violations), fmt(r.empirical_rate), fmt(r.theoretical_rate_bound),
                          fmt(r.ci), fmt(r.solver_failures), r.passed ? "true" : "false", joined(r.bound_params),
                          joined(r.statistics)});
    write_output(cfg, "probes.csv", t, log);
}

}  // namespace

void run(const RunConfig& cfg, std::ostream& log) {
    std::filesystem::create_directories(cfg.output_dir);
    {
        // The manifest goes first so a failed run still records what was attempted.
        std::ofstream manifest(cfg.output_dir / "manifest.ini", std::ios::binary);
        if (!manifest) throw std::runtime_error("cannot write " + (cfg.output_dir / "manifest.ini").string());
        manifest << manifest_text(cfg);
    }
    if (cfg.threads > 0) set_default_threads(cfg.threads);

    try {
        if (cfg.command == "upfm-solve") run_upfm(cfg, log);
        else if (cfg.command == "feasibility-sweep") run_sweep(cfg, log);
        else if (cfg.command == "train") run_train(cfg, log);
        else if (cfg.command == "rf-rank") run_rf(cfg, log);
        else if (cfg.command == "gen-analysis") run_gen(cfg, log);
        else if (cfg.command == "probe") run_probe(cfg, log);
        else throw ConfigError("unknown command '" + cfg.command + "'");
    } catch (const std::invalid_argument& e) {
        // Module preconditions are part of the config contract.
        throw ConfigError(e.what());
    }
}

}  // namespace nclab::cli
