#pragma once

namespace forgery {

/// Binary target shrunk toward 0.5: y(1 - eps) + eps/2.
double smoothed_target(int label, double eps);

/// Cross-entropy against the smoothed target. Requires 0 < p < 1 (callers clip) and
/// eps in [0, 1); throws std::invalid_argument otherwise.
double smoothed_bce_loss(double p, int label, double eps);

/// d(smoothed_bce_loss)/dp.
double smoothed_bce_grad(double p, int label, double eps);

/// Cross-entropy of sigmoid(logit) against a soft target in [0,1], evaluated stably as
/// softplus(logit) - target * logit. Its derivative in the logit is sigmoid(logit) - target.
double bce_with_logit(double logit, double target);

}  // namespace forgery
