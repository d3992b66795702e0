#include <aqualift/mass_model.hpp>

#include <aqualift/errors.hpp>

#include <cmath>

namespace aqualift {

MassModel MassModel::constant() {
  MassModel m;
  m.kind_ = MassModelKind::Constant;
  m.dim_ = 1;
  m.mass_ = [](const VecX& th, double) { return th(0); };
  m.rate_ = [](const VecX&, double) { return 0.0; };
  m.grad_mass_ = [](const VecX&, double) { return VecX::Ones(1).eval(); };
  m.grad_rate_ = [](const VecX&, double) { return VecX::Zero(1).eval(); };
  m.accel_ = [](const VecX&, double) { return 0.0; };
  return m;
}

MassModel MassModel::viscous_leak() {
  MassModel m;
  m.kind_ = MassModelKind::ViscousLeak;
  m.dim_ = 2;
  m.mass_ = [](const VecX& th, double t) { return th(0) * std::exp(-th(1) * t); };
  m.rate_ = [](const VecX& th, double t) { return -th(1) * th(0) * std::exp(-th(1) * t); };
  m.grad_mass_ = [](const VecX& th, double t) {
    VecX g(2);
    const double e = std::exp(-th(1) * t);
    g << e, -t * th(0) * e;
    return g;
  };
  m.grad_rate_ = [](const VecX& th, double t) {
    VecX g(2);
    const double e = std::exp(-th(1) * t);
    g << -th(1) * e, th(0) * e * (th(1) * t - 1.0);
    return g;
  };
  m.accel_ = [](const VecX& th, double t) {
    return th(1) * th(1) * th(0) * std::exp(-th(1) * t);
  };
  return m;
}

MassModel MassModel::orifice_leak() {
  // m(t) = (sqrt(m0) - sqrt(lam) t)^2 until depletion, then 0 with all
  // sensitivities frozen (the model is not differentiable at depletion and
  // the physical mass cannot go negative).
  MassModel m;
  m.kind_ = MassModelKind::OrificeLeak;
  m.dim_ = 2;
  auto head = [](const VecX& th, double t) {
    return std::sqrt(th(0)) - std::sqrt(th(1)) * t;  // > 0 before depletion
  };
  m.mass_ = [head](const VecX& th, double t) {
    const double s = head(th, t);
    return s > 0.0 ? s * s : 0.0;
  };
  m.rate_ = [head](const VecX& th, double t) {
    const double s = head(th, t);
    return s > 0.0 ? -2.0 * std::sqrt(th(1)) * s : 0.0;
  };
  m.grad_mass_ = [head](const VecX& th, double t) {
    VecX g = VecX::Zero(2);
    const double s = head(th, t);
    if (s > 0.0) {
      g(0) = s / std::sqrt(th(0));
      g(1) = -s * t / std::sqrt(th(1));
    }
    return g;
  };
  m.grad_rate_ = [head](const VecX& th, double t) {
    VecX g = VecX::Zero(2);
    const double s = head(th, t);
    if (s > 0.0) {
      g(0) = -std::sqrt(th(1) / th(0));
      g(1) = -std::sqrt(th(0) / th(1)) + 2.0 * t;
    }
    return g;
  };
  m.accel_ = [head](const VecX& th, double t) {
    return head(th, t) > 0.0 ? 2.0 * th(1) : 0.0;
  };
  return m;
}

MassModel MassModel::custom(int dim,
                            std::function<double(const VecX&, double)> mass,
                            std::function<double(const VecX&, double)> mass_rate,
                            std::function<VecX(const VecX&, double)> grad_mass,
                            std::function<VecX(const VecX&, double)> grad_rate,
                            std::function<double(const VecX&, double)> mass_accel) {
  if (dim < 1 || !mass || !mass_rate || !grad_mass || !grad_rate) {
    throw ValidationError("MassModel::custom: dimension and all maps are required");
  }
  MassModel m;
  m.kind_ = MassModelKind::Custom;
  m.dim_ = dim;
  m.mass_ = std::move(mass);
  m.rate_ = std::move(mass_rate);
  m.grad_mass_ = std::move(grad_mass);
  m.grad_rate_ = std::move(grad_rate);
  m.accel_ = mass_accel ? std::move(mass_accel) : [](const VecX&, double) { return 0.0; };
  return m;
}

void MassModel::project(VecX& theta, double t, double m_min) const {
  switch (kind_) {
    case MassModelKind::Constant:
      theta(0) = std::max(theta(0), m_min);
      break;
    case MassModelKind::ViscousLeak: {
      theta(1) = std::max(theta(1), 0.0);
      const double m = mass(theta, t);
      if (m < m_min) theta(0) *= m_min / m;
      theta(0) = std::max(theta(0), m_min);
      break;
    }
    case MassModelKind::OrificeLeak: {
      theta(1) = std::max(theta(1), 1e-12);
      if (mass(theta, t) < m_min) {
        const double root = std::sqrt(m_min) + std::sqrt(theta(1)) * t;
        theta(0) = root * root;
      }
      break;
    }
    case MassModelKind::Custom:
      break;  // admissibility is the caller's contract for custom models
  }
}

}  // namespace aqualift
