#include "forgery/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace forgery {

namespace {

void check_label_and_eps(int label, double eps) {
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("label smoothing must be in [0, 1)");
}

}  // namespace

double smoothed_target(int label, double eps) {
  check_label_and_eps(label, eps);
  return label * (1.0 - eps) + eps / 2.0;
}

double smoothed_bce_loss(double p, int label, double eps) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("smoothed_bce_loss: p must lie in (0, 1)");
  const double t = smoothed_target(label, eps);
  return -(t * std::log(p) + (1.0 - t) * std::log1p(-p));
}

double smoothed_bce_grad(double p, int label, double eps) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("smoothed_bce_grad: p must lie in (0, 1)");
  const double t = smoothed_target(label, eps);
  return -t / p + (1.0 - t) / (1.0 - p);
}

double bce_with_logit(double logit, double target) {
  const double softplus = logit > 0 ? logit + std::log1p(std::exp(-logit)) : std::log1p(std::exp(logit));
  return softplus - target * logit;
}

}  // namespace forgery
