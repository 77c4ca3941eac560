#pragma once

#include "lpres/model.hpp"

#include <functional>
#include <vector>

namespace lpres::detail {

struct ComplexQuad {
    cplx value;
    double error = 0.0;
};

struct RealQuad {
    double value = 0.0;
    double error = 0.0;
};

// \int r(l)/(z - l) dl for a real r decaying at infinity, Im z != 0.
ComplexQuad cauchy_numeric(const std::function<double(double)>& r, cplx z, double center, double scale);

// PV \int r(l)/(sigma - l) dl as \int_0^inf [r(sigma - t) - r(sigma + t)]/t dt.
RealQuad pv_numeric(const std::function<double(double)>& r, double sigma, double center, double scale);

// Exact transforms of a piecewise-linear table (zero outside its range).
cplx cauchy_table(const std::vector<double>& lam, const std::vector<double>& val, cplx z);
double pv_table(const std::vector<double>& lam, const std::vector<double>& val, double sigma);
// \int rho(l)/(z - l)^2 dl with the sign of -d/dz of cauchy_table
cplx cauchy_table_dz(const std::vector<double>& lam, const std::vector<double>& val, cplx z);

}  // namespace lpres::detail
