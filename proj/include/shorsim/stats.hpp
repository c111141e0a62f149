#pragma once

#include <vector>

namespace shorsim {

// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Pearson statistic over cells with the given expected counts.
double chi_square_statistic(const std::vector<double>& observed,
                            const std::vector<double>& expected);

// p-value of the statistic at the given degrees of freedom.
double chi_square_pvalue(double statistic, unsigned dof);

// Chi-square goodness-of-fit p-value with small expected cells merged into a
// tail bucket (expected >= 5 rule).
double chi_square_gof_pvalue(const std::vector<double>& observed,
                             const std::vector<double>& expected,
                             double min_expected = 5.0);

} // namespace shorsim
