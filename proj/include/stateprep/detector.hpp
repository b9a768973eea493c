#ifndef STATEPREP_DETECTOR_HPP
#define STATEPREP_DETECTOR_HPP

// Finite-duration photodetection. A detector with spectral response p(k) and
// analyzer e, gated open for a time T_m around T, sees the amplitude
//   A(t) = sum_k p(k) f(k) e^{-ik(t - x)} d(e, e')
// and integrating |A|^2 over the gate produces the sinc kernel
//   M_{kk'} = e^{i(k' - k)T} sinc((k - k') T_m / 2).

#include <cmath>
#include <string>
#include <utility>

#include "errors.hpp"
#include "linalg.hpp"
#include "modes.hpp"

namespace stateprep
{

struct MeasurementWindow
{
    double center = 0.0;   // gate center T, in retarded time
    double duration = 1.0; // gate length T_m

    MeasurementWindow() = default;
    MeasurementWindow(double c, double d) : center(c), duration(d)
    {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw ValidationError("MeasurementWindow: duration must be positive");
        }
    }
};

struct DetectorResponse
{
    SpectralVector response; // p(k), not normalized
    PolarizationVector analyzer;
    double position = 0.0;

    DetectorResponse(SpectralVector p, PolarizationVector e, double x = 0.0)
        : response(std::move(p)), analyzer(e), position(x)
    {
        if (std::abs(analyzer.norm() - 1.0) > 1e-12) {
            throw ValidationError("DetectorResponse: analyzer must be a unit polarization vector");
        }
    }

    const FrequencyGrid &grid() const { return response.grid; }

    // Retarded time tau = t - x of a detection at lab time t.
    double retarded(double t) const { return t - position; }
};

// Hermitian PSD kernel of the gate integral; unit diagonal.
inline CMatrix sinc_kernel(const FrequencyGrid &grid, const MeasurementWindow &window)
{
    const int n = grid.size();
    CMatrix m(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double delta = grid[i] - grid[j]; // k - k'
            m(i, j) = sinc(delta * window.duration / 2.0) * std::exp(cplx(0.0, -delta * window.center));
        }
    }
    return m;
}

// Real symmetric part sinc((k_i - k_j) T_m / 2) of a kernel on an evenly
// spaced axis; only index differences matter.
inline Eigen::MatrixXd sinc_matrix(int n, double spacing, double duration)
{
    Eigen::VectorXd row(n);
    for (int d = 0; d < n; ++d) {
        row(d) = sinc(d * spacing * duration / 2.0);
    }
    Eigen::MatrixXd s(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            s(i, j) = row(std::abs(i - j));
        }
    }
    return s;
}

enum class Regime
{
    Short,
    Intermediate,
    Long,
};

inline const char *to_string(Regime r)
{
    switch (r) {
    case Regime::Short:
        return "SHORT";
    case Regime::Intermediate:
        return "INTERMEDIATE";
    case Regime::Long:
        return "LONG";
    }
    return "?";
}

struct ThetaInfo
{
    double value = 0.0;
    Regime regime = Regime::Intermediate;
};

// Thresholds only steer warnings; physics never branches on them.
inline constexpr double kShortThetaMax = 0.1;
inline constexpr double kLongThetaMin = 10.0;

inline Regime classify_theta(double theta)
{
    if (theta <= kShortThetaMax) {
        return Regime::Short;
    }
    if (theta >= kLongThetaMin) {
        return Regime::Long;
    }
    return Regime::Intermediate;
}

// theta = packet width x gate duration = T_m / T_k.
inline ThetaInfo theta_parameter(double packet_width, const MeasurementWindow &window)
{
    if (!(packet_width > 0.0)) {
        throw ValidationError("theta_parameter: packet width must be positive");
    }
    const double theta = packet_width * window.duration;
    return ThetaInfo{theta, classify_theta(theta)};
}

// Gate-averaged counting rate (1/T_m) int |<0|E|phi>|^2 dtau for a single
// photon with spectrum `packet` and polarization `packet_pol`.
inline double windowed_intensity(const SpectralVector &packet, const PolarizationVector &packet_pol,
                                 const DetectorResponse &det, const MeasurementWindow &window)
{
    if (!(packet.grid == det.grid())) {
        throw ValidationError("windowed_intensity: packet and detector use different grids");
    }
    const double d2 = std::norm(polarization_dot(det.analyzer, packet_pol));
    if (d2 == 0.0) {
        return 0.0;
    }
    const CVector a = packet.values.cwiseProduct(det.response.values);
    const CMatrix m = sinc_kernel(packet.grid, window);
    const double value = (a.transpose() * m * a.conjugate())(0, 0).real() * d2;
    return std::max(value, 0.0);
}

// Band filter centered at `center`. A width at or below dk/10 selects the
// Kronecker-delta idealization: a single unit entry at `center`, which must
// then sit on a grid point.
inline DetectorResponse narrow_filter_response(const FrequencyGrid &grid, double center, double width,
                                               const PolarizationVector &analyzer = PolarizationVector::e_plus(),
                                               double position = 0.0, Warnings *warnings = nullptr)
{
    if (!(width > 0.0)) {
        throw DomainError("narrow_filter_response: width must be positive");
    }
    if (!grid.contains(center)) {
        throw DomainError("narrow_filter_response: center lies outside the grid");
    }
    CVector p = CVector::Zero(grid.size());
    if (width <= grid.dk() / 10.0) {
        if (!grid.on_grid(center)) {
            throw DomainError("narrow_filter_response: delta filter center is not a grid point");
        }
        p(grid.nearest_index(center)) = 1.0;
        return DetectorResponse(SpectralVector(grid, p), analyzer, position);
    }
    if (width < grid.dk()) {
        warn(warnings, "narrow_filter_response: width is below the grid spacing");
    }
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid[i] - center;
        p(i) = std::exp(-x * x / (4.0 * width * width));
    }
    return DetectorResponse(SpectralVector(grid, p), analyzer, position);
}

// Broadband detector: p = 1 everywhere.
inline DetectorResponse flat_response(const FrequencyGrid &grid,
                                      const PolarizationVector &analyzer = PolarizationVector::e_plus(),
                                      double position = 0.0)
{
    return DetectorResponse(SpectralVector(grid, CVector::Ones(grid.size())), analyzer, position);
}

} // namespace stateprep

#endif // STATEPREP_DETECTOR_HPP
