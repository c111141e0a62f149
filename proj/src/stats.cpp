#include "shorsim/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace shorsim {

namespace {

// series expansion of P(a, x), valid for x < a + 1
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction for Q(a, x), valid for x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_statistic(const std::vector<double>& observed,
                            const std::vector<double>& expected) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi_square: size mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw std::invalid_argument("chi_square: nonpositive expected");
        double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    return stat;
}

double chi_square_pvalue(double statistic, unsigned dof) {
    if (dof == 0) return 1.0;
    return gamma_q(dof / 2.0, statistic / 2.0);
}

double chi_square_gof_pvalue(const std::vector<double>& observed,
                             const std::vector<double>& expected, double min_expected) {
    std::vector<double> obs, exp;
    double tail_obs = 0.0, tail_exp = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] >= min_expected) {
            obs.push_back(observed[i]);
            exp.push_back(expected[i]);
        } else {
            tail_obs += observed[i];
            tail_exp += expected[i];
        }
    }
    if (tail_exp > 0.0) {
        obs.push_back(tail_obs);
        exp.push_back(tail_exp);
    }
    if (obs.size() < 2) return 1.0;
    double stat = chi_square_statistic(obs, exp);
    return chi_square_pvalue(stat, static_cast<unsigned>(obs.size() - 1));
}

} // namespace shorsim
