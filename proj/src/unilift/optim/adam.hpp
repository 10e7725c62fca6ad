#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace unilift::optim {

struct AdamParams {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-tensor Adam moments. The caller owns the step counter so several tensors
// can advance in lockstep.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamParams params) : params_(params), m_(size, 0.0), v_(size, 0.0) {}

  // `step` is 1-based.
  void update(std::span<double> values, std::span<const double> grad, int step) {
    if (values.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam: size mismatch");
    const double bc1 = 1.0 - std::pow(params_.beta1, step);
    const double bc2 = 1.0 - std::pow(params_.beta2, step);
    for (std::size_t i = 0; i < m_.size(); ++i) {
      m_[i] = params_.beta1 * m_[i] + (1.0 - params_.beta1) * grad[i];
      v_[i] = params_.beta2 * v_[i] + (1.0 - params_.beta2) * grad[i] * grad[i];
      const double m_hat = m_[i] / bc1;
      const double v_hat = v_[i] / bc2;
      values[i] -= params_.learning_rate * m_hat / (std::sqrt(v_hat) + params_.epsilon);
    }
  }

  std::size_t size() const { return m_.size(); }

 private:
  AdamParams params_;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace unilift::optim
