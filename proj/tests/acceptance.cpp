// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anc/anc_harness.hpp"
#include "anc/feds_fap.hpp"
#include "anc/filter_core.hpp"
#include "explicit_feds_fap.hpp"

namespace fs = std::filesystem;
using namespace anc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (limit_s > 0.0 && secs >= limit_s) {
        out.pass = false;
        out.detail += " (over time limit)";
    }
    if (!out.pass) ++failures;
    std::printf("[%s] %d. %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, title.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

double at(const std::vector<double>& v, std::size_t n, std::size_t back) { return back <= n ? v[n - back] : 0.0; }

double rel_err(std::span<const double> a, std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

FedsFapConfig feds_fap(SelectionMode mode, std::size_t m, std::size_t l, std::size_t p, double mu) {
    FedsFapConfig c;
    c.mode = mode;
    c.taps = m;
    c.window = l;
    c.iterations = p;
    c.mu = mu;
    return c;
}

// ---------------------------------------------------------------------------

Outcome gram_cache_oracle() {
    const std::size_t M = 8, L = 25, N = 10000;
    std::mt19937_64 rng(101);
    const auto x = gaussian(N, rng), d = gaussian(N, rng);
    GramCache cache(M, L);
    for (std::size_t n = 0; n < N; ++n) cache.update(x[n], d[n]);
    const std::size_t n = N - 1;
    double worst = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
        for (std::size_t j = 0; j < M; ++j) {
            double g = 0.0;
            for (std::size_t i = 0; i < L; ++i) g += at(x, n, i + k) * at(x, n, i + j);
            worst = std::max(worst, std::abs(cache.gram(k, j) - g) / std::abs(g));
        }
        double r = 0.0;
        for (std::size_t i = 0; i < L; ++i) r += at(d, n, i) * at(x, n, i + k);
        worst = std::max(worst, std::abs(cache.cross(k) - r) / std::abs(r));
    }
    return {worst <= 1e-9, "max relative error " + fmt(worst) + " (limit 1e-9, no refresh)"};
}

Outcome explicit_equivalence() {
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> pick_m(1, 4), pick_p(1, 3);
    std::uniform_real_distribution<double> pick_mu(0.05, 1.0);
    double worst = 0.0;
    for (int instance = 0; instance < 100; ++instance) {
        const std::size_t M = pick_m(rng);
        const std::size_t L = std::uniform_int_distribution<std::size_t>(M + 1, 8)(rng);
        const std::size_t P = pick_p(rng);
        const double mu = pick_mu(rng);
        const auto x = gaussian(300, rng), d = gaussian(300, rng);
        for (auto mode : {SelectionMode::fap, SelectionMode::feds}) {
            FedsFapFilter fast(feds_fap(mode, M, L, P, mu));
            explicit_form::Filter slow{mode == SelectionMode::fap, M, L, P, mu};
            for (std::size_t n = 0; n < x.size(); ++n) {
                fast.step(x[n], d[n]);
                slow.step(x[n], d[n]);
                worst = std::max(worst, rel_err(fast.coefficients(), slow.h));
            }
        }
    }
    return {worst <= 1e-9, "max relative h difference " + fmt(worst) + " over 100 instances x 300 steps x {FAP, FEDS}"};
}

Outcome annihilation() {
    std::mt19937_64 rng(303);
    const std::size_t M = 8, L = 25;
    const auto x = gaussian(1000, rng), d = gaussian(1000, rng);
    FedsFapFilter f(feds_fap(SelectionMode::fap, M, L, 1, 1.0));
    double worst = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        f.step(x[n], d[n]);
        const std::size_t j = f.last_selections()[0];
        double dd = 0.0, c = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
            dd += at(d, n, i) * at(d, n, i);
            double e = at(d, n, i);
            for (std::size_t k = 0; k < M; ++k) e -= f.coefficients()[k] * at(x, n, i + k);
            c += e * at(x, n, i + j);
        }
        worst = std::max(worst, std::abs(c) / std::sqrt(dd));
    }
    return {worst < 1e-10, "max |<e1, x_j0>| / ||d|| = " + fmt(worst) + " over 1000 steps (limit 1e-10)"};
}

Outcome reductions() {
    std::mt19937_64 rng(404);
    const std::size_t M = 8;
    const auto x = gaussian(2000, rng), d = gaussian(2000, rng);
    std::vector<double> ha(M, 0.0), hn(M, 0.0), hf(M, 0.0);
    double ap_diff = 0.0, post = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        std::vector<double> r(M);
        for (std::size_t k = 0; k < M; ++k) r[k] = at(x, n, k);
        ApBlock block{Eigen::Map<const Eigen::RowVectorXd>(r.data(), static_cast<Eigen::Index>(M)),
                      Eigen::VectorXd::Constant(1, d[n])};
        ap_step(ha, block, 0.4, 0.0);
        nlms_step(hn, r, d[n], 0.4, 0.0);
        for (std::size_t k = 0; k < M; ++k) ap_diff = std::max(ap_diff, std::abs(ha[k] - hn[k]));

        nlms_step(hf, r, d[n], 1.0, 0.0);
        post = std::max(post, std::abs(d[n] - predict(hf, r)));
    }
    return {ap_diff <= 1e-14 && post < 1e-12,
            "AP(K=1) vs NLMS max diff " + fmt(ap_diff) + " (limit 1e-14); NLMS mu=1 a posteriori error " + fmt(post) +
                " (limit 1e-12)"};
}

Outcome rls_oracles() {
    std::mt19937_64 rng(505);
    // Inverse form against accumulate-and-invert.
    const double lambda = 0.97, delta_init = 50.0;
    const auto x = gaussian(40, rng), d = gaussian(40, rng);
    auto state = rls_init(3, lambda, delta_init);
    std::vector<double> h(3, 0.0);
    Eigen::Matrix3d C = Eigen::Matrix3d::Identity() / delta_init;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    double naive = 0.0;
    for (std::size_t n = 0; n < 30; ++n) {
        const Eigen::Vector3d v(at(x, n, 0), at(x, n, 1), at(x, n, 2));
        rls_step(h, state, std::vector<double>{v(0), v(1), v(2)}, d[n]);
        C = lambda * C + v * v.transpose();
        g += C.inverse() * v * (d[n] - g.dot(v));
        naive = std::max(naive, rel_err(h, std::vector<double>{g(0), g(1), g(2)}));
    }

    // lambda = 1 against regularized normal equations.
    const double big = 1e6;
    const auto x2 = gaussian(60, rng), d2 = gaussian(60, rng);
    auto s2 = rls_init(2, 1.0, big);
    std::vector<double> h2(2, 0.0);
    Eigen::Matrix2d A = Eigen::Matrix2d::Identity() / big;
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    for (std::size_t n = 0; n < 50; ++n) {
        const Eigen::Vector2d v(at(x2, n, 0), at(x2, n, 1));
        rls_step(h2, s2, std::vector<double>{v(0), v(1)}, d2[n]);
        A += v * v.transpose();
        b += d2[n] * v;
    }
    const Eigen::Vector2d w = A.ldlt().solve(b);
    const double normal = rel_err(h2, std::vector<double>{w(0), w(1)});
    return {naive <= 1e-8 && normal <= 1e-6, "accumulated-correlation oracle " + fmt(naive) +
                                                 " (limit 1e-8); normal equations " + fmt(normal) + " (limit 1e-6)"};
}

Outcome synthetic_anc() {
    SynthSpec spec;  // order-8 channel, -10 dB, 1e5 samples
    const auto sc = synth_anc_scenario(spec);
    std::vector<double> snri;
    std::string detail;
    for (auto a : kAllAlgorithms) {
        AlgoConfig c;
        c.algorithm = a;
        const auto r = run_anc(c, sc.primary, sc.reference, &sc.clean);
        snri.push_back(*r.snri);
        detail += display_name(a) + "=" + fmt(*r.snri) + " ";
    }
    // Table order: LMS, NLMS, APA, FEDS, FAPA, RLS.
    const bool all_above = std::all_of(snri.begin(), snri.end(), [](double v) { return v > 10.0; });
    const bool ordered = snri[0] < snri[1] && snri[1] < snri[2] && snri[2] <= snri[3] && snri[3] <= snri[4] &&
                         snri[4] <= snri[5] + 1.0;
    detail += all_above ? "| all > 10 dB" : "| some <= 10 dB";
    detail += ordered ? ", ordering holds" : ", ordering violated";
    return {all_above && ordered, detail};
}

Outcome sweep_shape() {
    SynthSpec spec;
    spec.noise_kind = NoiseKind::white;
    const auto sc = synth_anc_scenario(spec);
    std::vector<double> values;
    for (int m = 1; m <= 24; ++m) values.push_back(m);
    bool ok = true;
    std::string detail;
    for (auto a : {Algorithm::fap, Algorithm::feds}) {
        AlgoConfig base;
        base.algorithm = a;
        base.window = 25;
        base.iterations = 1;
        base.mu = 0.002;
        const auto rows = sweep(base, SweepParam::taps, values, sc, 4);
        const auto best = best_row(rows);
        const double m = best ? rows[*best].value : -1.0;
        ok = ok && m >= 7.0 && m <= 9.0;
        detail += display_name(a) + " peak at M=" + fmt(m) + (best ? " (" + fmt(*rows[*best].snri) + " dB) " : " ");
    }
    return {ok, detail + "| expected M in {7,8,9}"};
}

Outcome complexity_shape() {
    auto warm = [](SelectionMode mode, std::size_t m, std::size_t l) {
        FedsFapFilter f(feds_fap(mode, m, l, 8, 0.002));
        std::mt19937_64 rng(606);
        const auto x = gaussian(400, rng);
        for (std::size_t n = 0; n + 1 < x.size(); ++n) f.step(x[n], x[n + 1]);
        return f.multiply_count();
    };
    bool ok = true;
    std::string detail;
    for (auto mode : {SelectionMode::feds, SelectionMode::fap}) {
        const bool same_l = warm(mode, 8, 25) == warm(mode, 8, 100);
        const auto t1 = static_cast<long>(warm(mode, 4, 120).total());
        const auto t2 = static_cast<long>(warm(mode, 8, 120).total());
        const auto t3 = static_cast<long>(warm(mode, 16, 120).total());
        const bool affine = (t2 - t1) * (16 - 8) == (t3 - t2) * (8 - 4);
        ok = ok && same_l && affine;
        detail += std::string(mode == SelectionMode::feds ? "FEDS" : "FAP") + ": L=25/100 " +
                  (same_l ? "identical" : "differ") + ", M=4/8/16 -> " + std::to_string(t1) + "/" +
                  std::to_string(t2) + "/" + std::to_string(t3) + (affine ? " collinear; " : " not collinear; ");
    }
    return {ok, detail + "P=8"};
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(ANC_BINARY) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "anc_acceptance";
    fs::remove_all(root);
    const int a = run_cli("compare --threads 3 --out " + (root / "a").string());
    const int b = run_cli("compare --threads 6 --out " + (root / "b").string());
    if (a != 0 || b != 0) return {false, "compare exited with " + std::to_string(a) + "/" + std::to_string(b)};
    const std::string ta = slurp(root / "a" / "table.csv");
    const std::string tb = slurp(root / "b" / "table.csv");
    const bool same = !ta.empty() && ta == tb;
    return {same, same ? "table.csv byte-identical across two runs (" + std::to_string(ta.size()) + " bytes)"
                       : "table.csv differs between runs"};
}

}  // namespace

int main() {
    report(1, "Gram-cache oracle", 5.0, gram_cache_oracle);
    report(2, "Explicit-formulation equivalence", 10.0, explicit_equivalence);
    report(3, "Annihilation", 0.0, annihilation);
    report(4, "Reductions", 0.0, reductions);
    report(5, "RLS oracles", 0.0, rls_oracles);
    report(6, "Synthetic ANC", 60.0, synthetic_anc);
    report(7, "Sweep shape", 120.0, sweep_shape);
    report(8, "Complexity shape", 0.0, complexity_shape);
    report(9, "Determinism", 0.0, determinism);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
