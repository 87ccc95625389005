#include "phaseret/optics/field.hpp"

#include <cmath>

namespace phaseret::optics {

Image2D intensity(const ComplexField2D& field) {
  Image2D out(field.height, field.width);
  for (size_t i = 0; i < field.v.size(); ++i) {
    const cplx z = field.v[i];
    out.v[i] = z.real() * z.real() + z.imag() * z.imag();
  }
  return out;
}

double total_power(const ComplexField2D& field) {
  double s = 0.0;
  for (const cplx& z : field.v)
    s += z.real() * z.real() + z.imag() * z.imag();
  return s;
}

bool all_finite(const ComplexField2D& field) {
  for (const cplx& z : field.v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace phaseret::optics
