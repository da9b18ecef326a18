#include "pcsft/field_spec.hpp"

#include <cmath>

#include "pcsft/errors.hpp"

namespace pcsft {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void SuperpositionSpec::validate() const {
  if (coefficients.size() != basis.dim()) throw InvalidInput("superposition: coefficient count != basis dimension");
  if (!coefficients.allFinite()) throw InvalidInput("superposition: non-finite coefficient");
  if (coefficients.cwiseAbs().maxCoeff() == 0.0) throw InvalidInput("superposition: all coefficients are zero");
  if (!(driver_sigma2 > 0.0) || !std::isfinite(driver_sigma2)) {
    throw InvalidInput("superposition: driver_sigma2 must be > 0");
  }
}

StateVector SuperpositionSpec::state() const { return StateVector(CVector(basis.matrix() * coefficients)); }

FieldSpec FieldSpec::gaussian(HermitianOperator covariance) {
  const EigenDecomposition eig = hermitian_eig(covariance);
  if (eig.values.minCoeff() < -kTolPsd) throw NotPsdError("gaussian field: covariance is not PSD");
  return FieldSpec(GaussianSpec{std::move(covariance)});
}

FieldSpec FieldSpec::pure(StateVector psi, double sigma2) {
  if (psi.norm() == 0.0) throw InvalidInput("pure field: psi is the zero vector");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidInput("pure field: sigma2 must be > 0");
  return FieldSpec(PureSpec{std::move(psi), sigma2});
}

FieldSpec FieldSpec::superposition(SuperpositionSpec spec) {
  spec.validate();
  return FieldSpec(std::move(spec));
}

FieldSpec FieldSpec::decohered(FieldSpec inner, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidInput("decohered field: gamma must be >= 0");
  return FieldSpec(DecoheredSpec{std::make_shared<const FieldSpec>(std::move(inner)), gamma});
}

int FieldSpec::dim() const {
  return std::visit(overloaded{
                        [](const GaussianSpec& s) { return s.covariance.dim(); },
                        [](const PureSpec& s) { return s.psi.dim(); },
                        [](const SuperpositionSpec& s) { return s.basis.dim(); },
                        [](const DecoheredSpec& s) { return s.inner->dim(); },
                    },
                    kind_);
}

std::string FieldSpec::kind_name() const {
  return std::visit(overloaded{
                        [](const GaussianSpec&) { return std::string("gaussian"); },
                        [](const PureSpec&) { return std::string("pure"); },
                        [](const SuperpositionSpec&) { return std::string("superposition"); },
                        [](const DecoheredSpec&) { return std::string("decohered"); },
                    },
                    kind_);
}

HermitianOperator FieldSpec::analytic_covariance() const {
  return std::visit(
      overloaded{
          [](const GaussianSpec& s) { return s.covariance; },
          [](const PureSpec& s) { return make_projector(s.psi.normalized()).scaled(s.sigma2); },
          [](const SuperpositionSpec& s) { return make_projector(s.state()).scaled(s.driver_sigma2); },
          [this](const DecoheredSpec& s) {
            const CMatrix v = construction_basis().matrix();
            CMatrix c = v.adjoint() * s.inner->analytic_covariance().matrix() * v;
            const double factor = std::exp(-s.gamma);
            for (Eigen::Index i = 0; i < c.rows(); ++i) {
              for (Eigen::Index j = 0; j < c.cols(); ++j) {
                if (i != j) c(i, j) *= factor;
              }
            }
            CMatrix b = v * c * v.adjoint();
            return HermitianOperator(CMatrix((b + b.adjoint()) * 0.5));
          },
      },
      kind_);
}

OrthonormalBasis FieldSpec::construction_basis() const {
  if (const auto* s = std::get_if<SuperpositionSpec>(&kind_)) return s->basis;
  if (const auto* s = std::get_if<DecoheredSpec>(&kind_)) return s->inner->construction_basis();
  return OrthonormalBasis::standard(dim());
}

bool FieldSpec::is_rank_one() const {
  return std::holds_alternative<PureSpec>(kind_) || std::holds_alternative<SuperpositionSpec>(kind_);
}

CVector FieldSpec::rank_one_amplitude() const {
  if (const auto* s = std::get_if<PureSpec>(&kind_)) {
    return s->psi.normalized().amplitudes() * std::sqrt(s->sigma2);
  }
  if (const auto* s = std::get_if<SuperpositionSpec>(&kind_)) {
    return s->state().amplitudes() * std::sqrt(s->driver_sigma2);
  }
  throw InvalidInput("rank_one_amplitude: field kind '" + kind_name() + "' is not rank one");
}

// ---------------------------------------------------------------------------
// FieldSampler

FieldSampler::FieldSampler(const FieldSpec& spec) : dim_(spec.dim()) {
  if (const auto* g = std::get_if<GaussianSpec>(&spec.kind())) {
    linear_ = psd_sqrt(g->covariance).matrix();
  } else if (const auto* d = std::get_if<DecoheredSpec>(&spec.kind())) {
    inner_ = std::make_shared<const FieldSampler>(*d->inner);
    basis_ = d->inner->construction_basis().matrix();
    gamma_ = d->gamma;
  } else {
    linear_ = spec.rank_one_amplitude();
  }
}

void FieldSampler::draw(GaussianSource& src, Eigen::Ref<CVector> out) const {
  if (inner_) {
    CVector inner(dim_);
    inner_->draw(src, inner);
    CMatrix xi = basis_.adjoint() * inner;
    apply_phase_noise(src, gamma_, xi);
    out = basis_ * xi;
    return;
  }
  if (const auto* sqrt_b = std::get_if<CMatrix>(&linear_)) {
    CVector z(dim_);
    for (int k = 0; k < dim_; ++k) z(k) = src.circular(1.0);
    out.noalias() = *sqrt_b * z;
    return;
  }
  const Complex eta = src.circular(1.0);
  out = std::get<CVector>(linear_) * eta;
}

void FieldSampler::draw_block(GaussianSource& src, Eigen::Ref<CMatrix> out) const {
  if (const auto* sqrt_b = std::get_if<CMatrix>(&linear_); sqrt_b && !inner_) {
    CMatrix z(dim_, out.cols());
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
      for (int k = 0; k < dim_; ++k) z(k, i) = src.circular(1.0);
    }
    out.noalias() = *sqrt_b * z;
    return;
  }
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    CVector col(dim_);
    draw(src, col);
    out.col(i) = col;
  }
}

void apply_phase_noise(GaussianSource& src, double gamma, Eigen::Ref<CMatrix> components) {
  if (gamma == 0.0) return;
  const double sd = std::sqrt(gamma);
  for (Eigen::Index i = 0; i < components.cols(); ++i) {
    for (Eigen::Index k = 0; k < components.rows(); ++k) {
      const double theta = sd * src.normal();
      components(k, i) *= std::polar(1.0, theta);
    }
  }
}

}  // namespace pcsft
