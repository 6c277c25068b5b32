#include "experiment/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

#include "analytic.hpp"
#include "experiment/csvio.hpp"
#include "experiment/histogram.hpp"
#include "oracle.hpp"

namespace qcavity {

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
    if (dir.empty() || dir == ".") return file;
    return dir + "/" + file;
}

std::string timeseries_header(const Config::Plan& plan) {
    std::string h = "t,increment,y";
    for (int n = 0; n <= plan.spec.params.atoms; ++n) h += ",p_" + std::to_string(n);
    h += ",re_a,im_a";
    if (plan.spec.compute_purity) h += ",purity";
    h += ",weight";
    if (plan.spec.feedback) h += ",gs";
    return h;
}

void write_timeseries(const Config::Plan& plan,
                      const std::vector<std::pair<std::string, std::string>>& echo,
                      const std::string& validity, long idx, const TrajectoryRecord& rec) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_traj%04ld.csv", plan.label.c_str(), idx);
    CsvWriter w(join_path(plan.out_dir, name), echo, {validity}, timeseries_header(plan));
    for (size_t i = 0; i < rec.t.size(); ++i) {
        std::vector<double> row{rec.t[i], rec.increment[i], rec.y[i]};
        for (double p : rec.populations[i]) row.push_back(p);
        row.push_back(rec.re_a[i]);
        row.push_back(rec.im_a[i]);
        if (plan.spec.compute_purity) row.push_back(rec.purity[i]);
        row.push_back(rec.weight[i]);
        if (plan.spec.feedback) row.push_back(rec.gs[i]);
        w.row(row);
    }
    w.close();
}

}  // namespace

RunResult run_experiment(const Config& cfg) {
    Config::Plan plan;
    try {
        plan = cfg.plan();
    } catch (const std::exception& e) {
        return {RunStatus::BadConfig, e.what()};
    }

    const auto echo = cfg.resolved();
    const std::string validity = "validity: " + plan.spec.params.validity_report();
    std::fprintf(stderr, "[%s] %ld trajectories, %ld steps each\n", plan.label.c_str(),
                 plan.trajectories, std::lround(plan.spec.t_end / plan.spec.params.dt));
    std::fprintf(stderr, "[%s] %s\n", plan.label.c_str(), validity.c_str());

    if (!plan.out_dir.empty() && plan.out_dir != ".") {
        std::error_code ec;
        std::filesystem::create_directories(plan.out_dir, ec);
        if (ec) return {RunStatus::IoFailure, "cannot create output directory " + plan.out_dir};
    }

    // fan out trajectories; each derives its own deterministic seed
    std::vector<TrajectoryRecord> records(static_cast<size_t>(plan.trajectories));
    std::atomic<long> failures{0};
    std::string first_error;
    std::mutex err_mutex;
    std::atomic<long> progress{0};

    const unsigned workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(),
                              static_cast<unsigned>(plan.trajectories)));
    auto work = [&](unsigned wid) {
        for (long i = wid; i < plan.trajectories; i += workers) {
            SimSpec spec = plan.spec;
            spec.seed = (plan.trajectories == 1)
                            ? plan.spec.seed
                            : derive_trajectory_seed(plan.spec.seed, static_cast<uint64_t>(i));
            if (!plan.want_timeseries || i >= plan.max_timeseries) spec.record_stride = 0;
            try {
                records[static_cast<size_t>(i)] = simulate(spec);
            } catch (const SimAbort& a) {
                ++failures;
                std::lock_guard<std::mutex> lk(err_mutex);
                if (first_error.empty())
                    first_error = "trajectory " + std::to_string(i) + " step " +
                                  std::to_string(a.step) + " (t = " + format_value(a.t) +
                                  "): " + a.what();
            } catch (const std::exception& e) {
                ++failures;
                std::lock_guard<std::mutex> lk(err_mutex);
                if (first_error.empty())
                    first_error = "trajectory " + std::to_string(i) + ": " + e.what();
            }
            const long done = ++progress;
            if (plan.trajectories >= 100 && done % (plan.trajectories / 10) == 0)
                std::fprintf(stderr, "[%s] %ld/%ld\n", plan.label.c_str(), done,
                             plan.trajectories);
        }
    };
    {
        std::vector<std::thread> pool;
        for (unsigned wdx = 0; wdx < workers; ++wdx) pool.emplace_back(work, wdx);
        for (auto& th : pool) th.join();
    }
    if (failures > 0) return {RunStatus::NumericAbort, first_error};

    try {
        if (plan.want_timeseries) {
            const long count = std::min(plan.trajectories, plan.max_timeseries);
            for (long i = 0; i < count; ++i)
                write_timeseries(plan, echo, validity, i, records[static_cast<size_t>(i)]);
        }

        if (plan.want_final) {
            std::string header = "trajectory,y,weight";
            for (int n = 0; n <= plan.spec.params.atoms; ++n) header += ",p_" + std::to_string(n);
            header += ",re_a,im_a,purity,atom_purity,clicks";
            CsvWriter w(join_path(plan.out_dir, plan.label + "_final.csv"), echo, {validity},
                        header);
            for (long i = 0; i < plan.trajectories; ++i) {
                const auto& r = records[static_cast<size_t>(i)];
                std::vector<double> row{static_cast<double>(i), r.final_y, r.final_weight};
                for (double p : r.final_populations) row.push_back(p);
                row.push_back(r.final_re_a);
                row.push_back(r.final_im_a);
                row.push_back(r.final_purity);
                row.push_back(r.final_atom_purity);
                row.push_back(static_cast<double>(r.clicks));
                w.row(row);
            }
            w.close();
        }

        if (plan.want_histogram) {
            std::vector<double> ys, ws;
            ys.reserve(static_cast<size_t>(plan.trajectories));
            for (const auto& r : records) {
                ys.push_back(r.final_y);
                ws.push_back(r.final_weight);
            }
            double lo = plan.histogram_lo, hi = plan.histogram_hi;
            const CavityParams& p = plan.spec.params;
            std::vector<double> rates, c0;
            const bool overlay = (p.gs == 0.0 && p.variant == HamiltonianVariant::Dicke &&
                                  std::abs(p.phi) < 1e-12 && std::abs(p.beta.imag()) < 1e-12);
            if (overlay) {
                c0 = binomial_weights(p.atoms);
                if (plan.spec.init == SimSpec::Init::Ground ||
                    plan.spec.init == SimSpec::Init::Number) {
                    c0.assign(static_cast<size_t>(p.atoms + 1), 0.0);
                    c0[static_cast<size_t>(plan.spec.init_n)] = 1.0;
                }
                for (int n = 0; n <= p.atoms; ++n)
                    rates.push_back(sensitivity_rate(n, p.g, p.beta, p.kappa1, p.kappa2, p.kappaL,
                                                     p.eta, RateApprox::Exact));
            }
            if (!(hi > lo)) {
                // auto range: cover all mixture components to 4 sigma
                const double t = plan.spec.t_end;
                double mlo = 0.0, mhi = 0.0;
                if (overlay) {
                    for (double r : rates) {
                        mlo = std::min(mlo, -r * t);
                        mhi = std::max(mhi, -r * t);
                    }
                }
                lo = mlo - 4.0 * std::sqrt(plan.spec.t_end);
                hi = mhi + 4.0 * std::sqrt(plan.spec.t_end);
            }
            const auto h = histogram(ys, ws, plan.histogram_bins, lo, hi);
            if (h.empty_flagged)
                std::fprintf(stderr, "[%s] histogram has zero in-range mass\n",
                             plan.label.c_str());
            std::string header = "bin_lo,bin_hi,bin_mid,weighted_count,density";
            if (overlay) header += ",density_analytic";
            CsvWriter w(join_path(plan.out_dir, plan.label + "_hist_y.csv"), echo, {validity},
                        header);
            for (int b = 0; b < h.bins(); ++b) {
                std::vector<double> row{h.lo + b * h.width(), h.lo + (b + 1) * h.width(),
                                        h.center(b), h.counts[static_cast<size_t>(b)],
                                        h.density(b)};
                if (overlay)
                    row.push_back(outcome_density(h.center(b), plan.spec.t_end, c0, rates));
                w.row(row);
            }
            w.close();
        }
    } catch (const IoError& e) {
        return {RunStatus::IoFailure, e.what()};
    }

    // machine-readable summary
    double mean_w = 0.0, mean_y = 0.0, mean_re = 0.0, min_eig = 0.0, top = 0.0, herm = 0.0;
    long flags = 0, clicks = 0;
    std::vector<double> mean_p(static_cast<size_t>(plan.spec.params.atoms + 1), 0.0);
    for (const auto& r : records) {
        mean_w += r.final_weight;
        mean_y += r.final_y;
        mean_re += r.final_re_a;
        min_eig = std::min(min_eig, r.min_eig_seen);
        top = std::max(top, r.max_top_fock);
        herm = std::max(herm, r.max_herm_defect);
        flags += r.positivity_flags;
        clicks += r.clicks;
        for (size_t n = 0; n < mean_p.size(); ++n) mean_p[n] += r.final_populations[n];
    }
    const double nt = static_cast<double>(plan.trajectories);
    std::printf("status=ok\nlabel=%s\ntrajectories=%ld\n", plan.label.c_str(),
                plan.trajectories);
    std::printf("mean_final_weight=%s\n", format_value(mean_w / nt).c_str());
    std::printf("mean_final_y=%s\n", format_value(mean_y / nt).c_str());
    std::printf("mean_final_re_a=%s\n", format_value(mean_re / nt).c_str());
    for (size_t n = 0; n < mean_p.size(); ++n)
        std::printf("mean_final_p_%zu=%s\n", n, format_value(mean_p[n] / nt).c_str());
    if (plan.spec.equation == Equation::Counting) std::printf("total_clicks=%ld\n", clicks);
    std::printf("positivity_flags=%ld\nmin_eigenvalue_seen=%s\nmax_herm_defect=%s\n", flags,
                format_value(min_eig).c_str(), format_value(herm).c_str());
    std::printf("max_top_fock_occupancy=%s\n", format_value(top).c_str());
    if (top > 1e-6)
        std::fprintf(stderr,
                     "[%s] warning: top Fock level occupancy %.3g exceeds 1e-6; consider a "
                     "larger fock_cutoff\n",
                     plan.label.c_str(), top);
    return {RunStatus::Ok, ""};
}

RunResult write_upq_table(double mu, double phi, const std::string& out_path) {
    try {
        const HomodyneKernel kern(mu, phi);
        std::FILE* f = out_path.empty() ? stdout : std::fopen(out_path.c_str(), "wb");
        if (!f) return {RunStatus::IoFailure, "cannot open " + out_path};
        std::fprintf(f, "# mu = %s\n# phi = %s\n# N_LO = %d\n# completeness_deficit = %s\n",
                     format_value(mu).c_str(), format_value(phi).c_str(), kern.n_lo(),
                     format_value(kern.completeness_deficit()).c_str());
        std::fprintf(f,
                     "k,u00_exact,u00_closed,u10_re_exact,u10_im_exact,u10_re_closed,"
                     "u10_im_closed,u11_exact,u11_closed,u20_re_exact,u20_im_exact,"
                     "u20_re_closed,u20_im_closed\n");
        double worst = 0.0;
        for (int k = -kern.kmax(); k <= kern.kmax(); ++k) {
            const auto& r = kern.row(k);
            const cx c10 = kern.u_closed(1, 0, k);
            const cx c20 = kern.u_closed(2, 0, k);
            const double c00 = kern.u_closed(0, 0, k).real();
            const double c11 = kern.u_closed(1, 1, k).real();
            std::fprintf(f, "%d,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s\n", k,
                         format_value(r.u00).c_str(), format_value(c00).c_str(),
                         format_value(r.u10.real()).c_str(), format_value(r.u10.imag()).c_str(),
                         format_value(c10.real()).c_str(), format_value(c10.imag()).c_str(),
                         format_value(r.u11).c_str(), format_value(c11).c_str(),
                         format_value(r.u20.real()).c_str(), format_value(r.u20.imag()).c_str(),
                         format_value(c20.real()).c_str(), format_value(c20.imag()).c_str());
            if (std::abs(static_cast<double>(k)) <= 4.0 * std::sqrt(2.0 * mu) && c00 > 0.0)
                worst = std::max(worst, std::abs(r.u00 - c00) / c00);
        }
        if (f != stdout) std::fclose(f);
        std::printf("status=ok\nmu=%s\nkmax=%d\nmax_rel_err_u00=%s\n", format_value(mu).c_str(),
                    kern.kmax(), format_value(worst).c_str());
        return {RunStatus::Ok, ""};
    } catch (const std::exception& e) {
        return {RunStatus::BadConfig, e.what()};
    }
}

RunResult write_fig2_profile(double r2t, int atoms, const std::string& out_path) {
    try {
        if (!(r2t > 0.0)) throw std::invalid_argument("r^2 t must be > 0");
        if (atoms < 1) throw std::invalid_argument("atoms must be >= 1");
        // scaled coordinates: u = y / sqrt(t); component n is a unit-width
        // Gaussian at -n sqrt(r^2 t)
        const double s = std::sqrt(r2t);
        const auto c0 = binomial_weights(atoms);
        std::vector<double> r(static_cast<size_t>(atoms + 1));
        for (int n = 0; n <= atoms; ++n) r[static_cast<size_t>(n)] = n * s;  // r_n * sqrt(t)

        std::FILE* f = out_path.empty() ? stdout : std::fopen(out_path.c_str(), "wb");
        if (!f) return {RunStatus::IoFailure, "cannot open " + out_path};
        std::fprintf(f, "# r2t = %s\n# atoms = %d\n# u = y/sqrt(t)\n", format_value(r2t).c_str(),
                     atoms);
        std::string header = "u,P";
        for (int n = 0; n <= atoms; ++n) header += ",p_" + std::to_string(n);
        std::fprintf(f, "%s\n", header.c_str());
        const double lo = -(atoms * s + 5.0), hi = 5.0;
        const int grid = 801;
        for (int i = 0; i < grid; ++i) {
            const double u = lo + (hi - lo) * i / (grid - 1);
            // outcome density in scaled units: t = 1, rates r_n sqrt(t)
            const double P = outcome_density(u, 1.0, c0, r);
            const auto wts = normalized(weights(1.0, u, c0, r));
            std::fprintf(f, "%s,%s", format_value(u).c_str(), format_value(P).c_str());
            for (double wv : wts) std::fprintf(f, ",%s", format_value(wv).c_str());
            std::fputc('\n', f);
        }
        if (f != stdout) std::fclose(f);
        std::printf("status=ok\nr2t=%s\natoms=%d\n", format_value(r2t).c_str(), atoms);
        return {RunStatus::Ok, ""};
    } catch (const std::exception& e) {
        return {RunStatus::BadConfig, e.what()};
    }
}

}  // namespace qcavity
