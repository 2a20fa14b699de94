#include "eikonal/verify.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <array>
#include <cmath>
#include <limits>

namespace eikonal::verify {

Vec4 fiber_point(const Family3D& family, const ParamPoint& z, double x3, double u)
{
    const family3d::Generators G = family.generators(z.z1, z.z2);
    const double sg = family.variants().constraint == family3d::ConstraintVariant::YDisplay ? 1.0 : -1.0;
    Vec4 x;
    x[3] = x3;
    x[1] = -sg * x3 * z.z1 / z.s + G.g1 * u - G.k1;
    x[2] = -sg * x3 * z.z2 / z.s + G.g2 * u - G.k2;
    x[0] = x[1] * z.z1 + x[2] * z.z2 - x3 * z.s + G.k - u * G.g;
    return x;
}

namespace {

constexpr int kUnknowns = 5;
using Theta = Eigen::Matrix<double, kUnknowns, 1>;
using Basis = Eigen::Matrix<double, 4, kUnknowns>;

// Gradient of v at one fiber point is a + B theta.
struct FiberSample {
    Vec4 a;
    Basis b;
};

const Eigen::DiagonalMatrix<double, 4> kEta(1.0, -1.0, -1.0, -1.0);

FiberSample sample_at(const Family3D& family, const ParamPoint& z_star, const Vec4& x, double u0,
    const FiberOptions& options)
{
    // per stencil point: (g x3/s, u, dz1, dz2)
    auto fields = [&](const Vec4& xx) -> std::array<double, 4> {
        const auto z = family.track(xx, x, z_star, options.solver);
        if (!z)
            throw NumericalError("fiber sample: tracking failed on the stencil");
        const double g = family.generators(z->z1, z->z2).g;
        return {g * xx[3] / z->s, family.u_of(xx, *z), z->z1 - z_star.z1, z->z2 - z_star.z2};
    };
    const Vec4 steps = num::default_fd_steps<4>(x, options.fd_step);
    Eigen::Matrix<double, 4, 4> grads; // row: field, col: mu
    for (int mu = 0; mu < 4; ++mu) {
        Vec4 xp = x, xm = x;
        xp[mu] += steps[mu];
        xm[mu] -= steps[mu];
        const auto fp = fields(xp), fm = fields(xm);
        for (int k = 0; k < 4; ++k)
            grads(k, mu) = (fp[k] - fm[k]) / (xp[mu] - xm[mu]);
    }
    FiberSample s;
    s.a = grads.row(0).transpose();
    s.b.col(0) = grads.row(1).transpose();
    s.b.col(1) = u0 * grads.row(2).transpose();
    s.b.col(2) = u0 * grads.row(3).transpose();
    s.b.col(3) = grads.row(2).transpose();
    s.b.col(4) = grads.row(3).transpose();
    return s;
}

struct NullFit : Eigen::DenseFunctor<double> {
    const std::vector<FiberSample>* samples;

    explicit NullFit(const std::vector<FiberSample>& s)
        : Eigen::DenseFunctor<double>(kUnknowns, static_cast<int>(s.size())), samples(&s)
    {
    }

    int operator()(const InputType& theta, ValueType& f) const
    {
        for (std::size_t k = 0; k < samples->size(); ++k) {
            const Vec4 gv = (*samples)[k].a + (*samples)[k].b * theta;
            f[static_cast<Eigen::Index>(k)] = gv.dot(kEta * gv);
        }
        return 0;
    }

    int df(const InputType& theta, JacobianType& jac) const
    {
        for (std::size_t k = 0; k < samples->size(); ++k) {
            const Vec4 gv = (*samples)[k].a + (*samples)[k].b * theta;
            jac.row(static_cast<Eigen::Index>(k)) = 2.0 * (kEta * gv).transpose() * (*samples)[k].b;
        }
        return 0;
    }
};

} // namespace

FiberClosure fiber_derive_closure(const Family3D& family, const ParamPoint& z_star, const FiberOptions& options)
{
    if (options.n_points < 5)
        throw PreconditionError("fiber_derive_closure needs n_points >= 5");
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> depth(0.3, 1.2);
    std::uniform_real_distribution<double> phase(-1.0, 1.0);

    std::vector<FiberSample> samples;
    for (int attempt = 0; attempt < 4 * options.n_points && static_cast<int>(samples.size()) < options.n_points;
         ++attempt) {
        const double x3 = depth(rng);
        const double u = phase(rng);
        const Vec4 x = fiber_point(family, z_star, x3, u);
        try {
            samples.push_back(sample_at(family, z_star, x, u, options));
        } catch (const Error&) {
        }
    }
    if (static_cast<int>(samples.size()) < kUnknowns)
        throw NumericalError("fiber_derive_closure: only " + std::to_string(samples.size())
            + " usable fiber samples; use more or better-spread points");

    NullFit fit(samples);
    const auto m = static_cast<Eigen::Index>(samples.size());
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(kUnknowns);
    {
        // minimum-norm Gauss-Newton start: directions that enter v.v only
        // quadratically have near-zero columns and stay at zero
        Eigen::VectorXd f0(m);
        Eigen::MatrixXd j0(m, kUnknowns);
        fit(theta, f0);
        fit.df(theta, j0);
        Eigen::JacobiSVD<Eigen::MatrixXd> gn(j0, Eigen::ComputeThinU | Eigen::ComputeThinV);
        gn.setThreshold(1e-8);
        theta = gn.solve(-f0);
    }
    Eigen::LevenbergMarquardt<NullFit> lm(fit);
    lm.setXtol(1e-15);
    lm.setFtol(1e-15);
    lm.setMaxfev(2000);
    // column-norm scaling stalls on those near-zero columns
    lm.setExternalScaling(true);
    lm.diag().setOnes(kUnknowns);
    lm.minimize(theta);

    // identifiability of theta from the sampled gradients; the fit Jacobian
    // itself can be singular at the solution when v.v is flat to first order
    Eigen::MatrixXd design(4 * static_cast<Eigen::Index>(samples.size()), kUnknowns);
    for (std::size_t k = 0; k < samples.size(); ++k)
        design.middleRows<4>(4 * static_cast<Eigen::Index>(k)) = samples[k].b;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const auto sv = svd.singularValues();
    const double cond = sv[kUnknowns - 1] > 0.0 ? sv[0] / sv[kUnknowns - 1] : std::numeric_limits<double>::infinity();
    if (!(cond <= options.max_condition))
        throw NumericalError("fiber_derive_closure: rank-deficient sampling (condition "
            + std::to_string(cond) + "); use more or better-spread points");

    Eigen::VectorXd f(static_cast<Eigen::Index>(samples.size()));
    fit(theta, f);
    FiberClosure out;
    out.p = theta[0];
    out.p_z1 = theta[1];
    out.p_z2 = theta[2];
    out.r_z1 = theta[3];
    out.r_z2 = theta[4];
    out.conditioning = cond;
    out.fit_residual = f.cwiseAbs().maxCoeff();
    out.points = static_cast<int>(samples.size());
    return out;
}

Field4 fiber_v_field(const Family3D& family, const ParamPoint& z_star, const FiberClosure& c,
    const Vec4& x_center, const num::SolverConfig& cfg)
{
    return [&family, z_star, c, x_center, cfg](const Vec4& x) {
        const auto z = family.track(x, x_center, z_star, cfg);
        if (!z)
            return std::numeric_limits<double>::quiet_NaN();
        const double d1 = z->z1 - z_star.z1, d2 = z->z2 - z_star.z2;
        const double g = family.generators(z->z1, z->z2).g;
        const double u = family.u_of(x, *z);
        return g * x[3] / z->s + (c.p + c.p_z1 * d1 + c.p_z2 * d2) * u + c.r_z1 * d1 + c.r_z2 * d2;
    };
}

} // namespace eikonal::verify
