// Command-line front end: discretize | solve | estimate | scan | cost.
// Scans are config-driven and emit CSV + JSON reports; the exit code is 0
// only when every declared check passes.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include <qeig/config.hpp>
#include <qeig/cost_model.hpp>
#include <qeig/discretize.hpp>
#include <qeig/experiments.hpp>
#include <qeig/phase_estimation.hpp>
#include <qeig/solver.hpp>
#include <qeig/splitting.hpp>
#include <qeig/version.hpp>

namespace {

qeig::ExperimentConfig load_config(const std::string& path, const CLI::Option* seed_opt,
                                   std::uint64_t seed)
{
    if (path.empty()) throw qeig::ConfigError("--config is required for this command");
    qeig::ExperimentConfig cfg = qeig::parse_config_file(path);
    if (seed_opt->count() > 0) cfg.seed = seed;
    return cfg;
}

void print_check(const qeig::CheckResult& c)
{
    std::printf("  [%s] %-28s measured=%.12g bound=%.12g\n", c.passed ? "pass" : "FAIL",
                c.name.c_str(), c.measured, c.bound);
}

void print_report(const qeig::ScanReport& rep, const qeig::ReportPaths& paths, int verbosity)
{
    std::printf("%s scan: %zu rows, config %s, seed %" PRIu64 "\n", rep.kind.c_str(),
                rep.rows.size(), rep.config_hash_hex.c_str(), rep.seed);
    for (const auto& [name, fit] : rep.fits) {
        if (fit.defined)
            std::printf("  fit %-12s slope=%.6f +/- %.6f (%d points, %zu excluded)\n", name.c_str(),
                        fit.slope, fit.half_width, fit.points_used, fit.excluded.size());
        else
            std::printf("  fit %-12s undefined\n", name.c_str());
    }
    for (const auto& c : rep.checks) print_check(c);
    if (verbosity > 0)
        for (const auto& n : rep.notes) std::printf("  note: %s\n", n.c_str());
    std::printf("  wrote %s\n  wrote %s\n", paths.csv.c_str(), paths.json.c_str());
    std::printf("%s\n", rep.pass() ? "all checks passed" : "CHECKS FAILED");
}

}

int main(int argc, char** argv)
{
    CLI::App app{std::string("qeig ") + qeig::version_string +
                 " - eigenvalue-estimation laboratory for periodic differential operators"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    int verbosity = 0;
    app.add_option("-c,--config", config_path, "JSON experiment config");
    app.add_option("-o,--output", output_dir, "output directory for report files");
    CLI::Option* seed_opt = app.add_option("--seed", seed, "override the config seed");
    app.add_flag("-v,--verbose", verbosity, "more detail on stdout");

    auto* disc = app.add_subcommand("discretize", "assemble the operator and print a summary");
    Eigen::Index disc_n = 8;
    bool disc_dump = false;
    disc->add_option("-n,--points", disc_n, "grid points per axis (power of two)");
    disc->add_flag("--dump", disc_dump, "write the matrix triplets as CSV into the output directory");

    auto* solve = app.add_subcommand("solve", "eigenvalues of the discretized operator");
    Eigen::Index solve_n = 8;
    Eigen::Index solve_count = 8;
    bool solve_krylov = false;
    double solve_mu = 0.0;
    solve->add_option("-n,--points", solve_n, "grid points per axis");
    solve->add_option("--count", solve_count, "how many low eigenvalues to print");
    solve->add_flag("--krylov", solve_krylov, "use the shift-invert iteration instead of dense solve");
    solve->add_option("--mu", solve_mu, "shift for the Krylov solver");

    auto* est = app.add_subcommand("estimate", "run the phase-estimation pipeline once");
    Eigen::Index est_n = 8, est_m = 64, est_f = 1, est_n0 = 0;
    std::int64_t est_samples = 0;
    double est_tau = 0.0, est_shift = 0.0;
    int est_nu = 2;
    bool est_reflection = false;
    est->add_option("-n,--points", est_n, "grid points per axis");
    est->add_option("-m,--bins", est_m, "index-register bins (power of two)");
    est->add_option("-f,--target", est_f, "eigenpair index for the initial state");
    est->add_option("--n0", est_n0, "coarse grid: prolong the coarse eigenvector instead");
    est->add_option("--tau", est_tau, "evolution step (0 picks a safe step from the spectrum)");
    est->add_option("--samples", est_samples, "measurement samples to draw");
    est->add_option("--shift", est_shift, "diagonal shift folded into the step");
    est->add_option("--nu", est_nu, "product order 2 or 4");
    est->add_flag("--reflection", est_reflection, "report the reflection overlap of the collapsed state");

    auto* scan = app.add_subcommand("scan", "run the configured scan and emit reports");

    auto* cost = app.add_subcommand("cost", "print the resource-model table");
    double cost_n = 0.0;
    int cost_d = 1, cost_s = 1, cost_nu = 2, cost_anc = 0;
    double cost_c = 3.0;
    cost->add_option("-n,--points", cost_n, "points per axis (enables direct mode, no config)");
    cost->add_option("-d,--dimension", cost_d, "dimension");
    cost->add_option("-s,--order", cost_s, "half differential order S");
    cost->add_option("--nu", cost_nu, "product order 2 or 4");
    cost->add_option("--c-exponent", cost_c, "polylog compilation exponent");
    cost->add_option("--ancillas", cost_anc, "ancilla qubit allowance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*disc) {
            const qeig::ExperimentConfig cfg = load_config(config_path, seed_opt, seed);
            const qeig::DiscretizedOperator op = qeig::detail::build_problem(cfg, disc_n);
            const qeig::SplitPlan plan = qeig::split_operator(op);
            std::printf("dimension %d, side %td, nonzeros %td\n", op.dimension, op.side(),
                        Eigen::Index(op.matrix.nonZeros()));
            std::printf("order S=%d, spectral-radius bound %.6g\n", op.order, op.norm_bound);
            std::printf("split parts R=%d (volume bound v=%.0f, r=%d qubits)\n",
                        int(plan.parts.size()), plan.volume_bound, plan.r_qubits);
            if (verbosity > 0 && op.side() <= 16) {
                const Eigen::MatrixXd dense(op.matrix);
                for (Eigen::Index i = 0; i < dense.rows(); ++i) {
                    for (Eigen::Index j = 0; j < dense.cols(); ++j)
                        std::printf("%10.4g ", dense(i, j));
                    std::printf("\n");
                }
            }
            if (disc_dump) {
                namespace fs = std::filesystem;
                fs::create_directories(output_dir);
                const std::string path =
                    (fs::path(output_dir) / (cfg.output_stem + "-matrix.csv")).string();
                std::ofstream out(path, std::ios::binary);
                out << "row,col,value\n";
                for (int k = 0; k < op.matrix.outerSize(); ++k)
                    for (qeig::SparseMat::InnerIterator it(op.matrix, k); it; ++it)
                        out << it.row() << "," << it.col() << ","
                            << qeig::detail::format_double(it.value()) << "\n";
                std::printf("wrote %s\n", path.c_str());
            }
            return 0;
        }

        if (*solve) {
            const qeig::ExperimentConfig cfg = load_config(config_path, seed_opt, seed);
            const qeig::DiscretizedOperator op = qeig::detail::build_problem(cfg, solve_n);
            if (solve_krylov) {
                const qeig::KrylovResult kr = qeig::eig_lowest_krylov(op, solve_mu);
                std::printf("eigenvalue nearest mu=%.12g: %.15g\n", solve_mu, kr.value);
                std::printf("iterations %d, residual %.3g, counted ops %.4g%s\n", kr.iterations,
                            kr.residual, double(kr.counted_ops),
                            kr.shift_perturbed ? " (shift was perturbed)" : "");
            } else {
                const qeig::EigenSystem sys = qeig::eig_dense(op);
                const Eigen::Index k = std::min<Eigen::Index>(solve_count, sys.values.size());
                for (Eigen::Index i = 0; i < k; ++i)
                    std::printf("lambda[%td] = %.15g\n", i, sys.values[i]);
            }
            return 0;
        }

        if (*est) {
            const qeig::ExperimentConfig cfg = load_config(config_path, seed_opt, seed);
            const qeig::DiscretizedOperator op = qeig::detail::build_problem(cfg, est_n);
            const qeig::SplitPlan plan = qeig::split_operator(op, est_nu);
            const qeig::EigenSystem sys = qeig::eig_dense(op);
            if (est_f < 0 || est_f >= sys.values.size())
                throw std::invalid_argument("estimate: eigenpair index out of range");
            Eigen::VectorXcd psi;
            if (est_n0 > 0)
                psi = qeig::coarse_guess(cfg.problem, est_n0, est_n, est_f, cfg.sampling).vector;
            else
                psi = sys.vectors.col(est_f).cast<std::complex<double>>();
            double tau = est_tau;
            if (tau == 0.0) {
                const double lam = sys.values[est_f];
                if (lam <= 0.0)
                    throw std::invalid_argument(
                        "estimate: pass --tau explicitly for nonpositive target eigenvalues");
                // Largest tau that keeps radius*tau <= 1, then snapped so the
                // target sits a third of a bin past a bin center. Resolution is
                // whatever m affords at that step; raise m for a sharper decode.
                const double radius = std::max(std::abs(sys.values[0]),
                                               std::abs(sys.values[sys.values.size() - 1]));
                const double two_pi = 2.0 * std::numbers::pi;
                const double position = lam * (1.0 / radius) * double(est_m) / two_pi;
                const double anchor = std::max(std::floor(position - 1.0 / 3.0), 0.0);
                tau = two_pi * (anchor + 1.0 / 3.0) / (double(est_m) * lam);
            }
            qeig::PhaseEstimationParams params;
            params.bins = est_m;
            params.tau = tau;
            params.samples = est_samples;
            params.seed = cfg.seed;
            params.shift_mu = est_shift;
            params.compute_reflection = est_reflection;
            const qeig::PhaseEstimateResult res = qeig::run_phase_estimation(plan, psi, params);
            std::printf("tau %.12g, bins %td, target lambda %.12g\n", tau, est_m,
                        sys.values[est_f]);
            std::printf("peak bin %td (probability %.6f)\n", res.peak_bin, res.peak_probability);
            std::printf("decoded lambda %.12g +/- %.6g\n", res.peak_decoded.lambda,
                        res.peak_decoded.half_width);
            if (est_reflection) std::printf("reflection overlap %.9f\n", res.reflection_overlap);
            if (est_samples > 0) {
                std::printf("drew %" PRId64 " samples with seed %" PRIu64 "\n", res.samples,
                            res.seed);
            }
            if (verbosity > 0) {
                for (Eigen::Index l = 0; l < est_m; ++l)
                    if (res.distribution[std::size_t(l)] > 1e-6)
                        std::printf("  bin %4td  p=%.6f\n", l, res.distribution[std::size_t(l)]);
            }
            return 0;
        }

        if (*scan) {
            const qeig::ExperimentConfig cfg = load_config(config_path, seed_opt, seed);
            if (verbosity > 0) std::printf("%s\n", cfg.raw.dump(2).c_str());
            const qeig::ScanReport rep = qeig::run_scan(cfg);
            const qeig::ReportPaths paths = qeig::emit_report(rep, output_dir);
            print_report(rep, paths, verbosity);
            return rep.pass() ? 0 : 2;
        }

        if (*cost) {
            if (cost_n >= 2.0) {
                qeig::CostInputs in;
                in.N = cost_n;
                in.D = cost_d;
                in.S = cost_s;
                in.nu = cost_nu;
                in.c = cost_c;
                in.ancillas = cost_anc;
                const qeig::CostReport cr = qeig::cost_report(in);
                std::printf("N=%g D=%d S=%d nu=%d c=%g\n", in.N, in.D, in.S, in.nu, in.c);
                std::printf("M = 2^%d, qubits = %d (accumulator %d + index %d + ancilla %d)\n",
                            cr.m.exponent, cr.qubits.total, cr.qubits.accumulator, cr.qubits.index,
                            cr.qubits.ancillas);
                std::printf("quantum gates %s, classical gates %s, classical memory bits %s\n",
                            cr.gates_quantum.to_string().c_str(),
                            cr.gates_classical.to_string().c_str(),
                            cr.memory_bits_classical.to_string().c_str());
                std::printf("log2 advantage ratio %.6g (threshold D > %g): %s\n", cr.ratio_log2,
                            cr.threshold_D, cr.advantage ? "advantaged" : "not advantaged");
                std::printf("%s\n", cr.advantage_statement.c_str());
                std::printf("rotation accuracy %.3g absolute (phase floor %.3g), relative "
                            "eigenvalue accuracy %.3g\n",
                            cr.rotation.absolute, cr.rotation.phase_floor,
                            cr.rotation.relative_eigenvalue);
                return 0;
            }
            const qeig::ExperimentConfig cfg = load_config(config_path, seed_opt, seed);
            const qeig::ScanReport rep = qeig::run_cost_scan(cfg);
            const qeig::ReportPaths paths = qeig::emit_report(rep, output_dir);
            print_report(rep, paths, verbosity);
            return rep.pass() ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
