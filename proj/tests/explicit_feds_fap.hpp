#pragma once

// Literal vector form of the sliding-window FEDS/FAP update: the windowed
// data matrix and error vector are rebuilt from the full sample history at
// every P-iteration. Used as an oracle for the cached implementation.

#include <cmath>
#include <cstddef>
#include <vector>

namespace explicit_form {

struct Filter {
    bool greedy = true;  // false: cyclic selection
    std::size_t taps;
    std::size_t window;
    std::size_t iterations;
    double mu;
    double sigma_min = 1e-12;

    std::vector<double> h = std::vector<double>(taps, 0.0);
    std::vector<double> xs;
    std::vector<double> ds;
    std::size_t counter = 0;

    double x_at(std::size_t n, std::size_t back) const { return back <= n ? xs[n - back] : 0.0; }
    double d_at(std::size_t n, std::size_t back) const { return back <= n ? ds[n - back] : 0.0; }

    void step(double x, double d) {
        xs.push_back(x);
        ds.push_back(d);
        const std::size_t n = xs.size() - 1;

        std::vector<std::vector<double>> cols(taps, std::vector<double>(window));
        std::vector<double> dv(window);
        for (std::size_t i = 0; i < window; ++i) {
            dv[i] = d_at(n, i);
            for (std::size_t j = 0; j < taps; ++j) cols[j][i] = x_at(n, i + j);
        }

        for (std::size_t it = 0; it < iterations; ++it) {
            std::vector<double> e = dv;
            for (std::size_t j = 0; j < taps; ++j)
                for (std::size_t i = 0; i < window; ++i) e[i] -= h[j] * cols[j][i];

            std::vector<double> corr(taps), norm_sq(taps);
            for (std::size_t j = 0; j < taps; ++j) {
                double c = 0.0, s = 0.0;
                for (std::size_t i = 0; i < window; ++i) {
                    c += e[i] * cols[j][i];
                    s += cols[j][i] * cols[j][i];
                }
                corr[j] = c;
                norm_sq[j] = s;
            }

            std::size_t jo = 0;
            bool found = false;
            if (greedy) {
                double best = -1.0;
                for (std::size_t j = 0; j < taps; ++j) {
                    if (!(norm_sq[j] > sigma_min)) continue;
                    const double score = std::abs(corr[j]) / std::sqrt(norm_sq[j]);
                    if (score > best) {
                        best = score;
                        jo = j;
                        found = true;
                    }
                }
            } else {
                jo = counter;
                counter = (counter + 1) % taps;
                found = norm_sq[jo] > sigma_min;
            }
            if (found) h[jo] += mu * corr[jo] / norm_sq[jo];
        }
    }
};

}  // namespace explicit_form
