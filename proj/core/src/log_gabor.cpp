#include "sonoclass/log_gabor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "sonoclass/error.hpp"

namespace sonoclass {
namespace {

double fft_frequency(std::size_t index, std::size_t n) {
  const auto i = static_cast<double>(index);
  const auto len = static_cast<double>(n);
  return (index <= n / 2 ? i : i - len) / len;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

RealMatrix multiply_and_invert(detail::Fft2d& fft, const ComplexMatrix& spectrum,
                               const RealMatrix& mask) {
  ComplexMatrix product(spectrum.rows(), spectrum.cols());
  const auto s = spectrum.flat();
  const auto m = mask.flat();
  auto p = product.flat();
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[i] * m[i];
  const ComplexMatrix response = fft.inverse(product);
  RealMatrix magnitude(response.rows(), response.cols());
  const auto r = response.flat();
  auto out = magnitude.flat();
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = std::abs(r[i]);
  return magnitude;
}

RealMatrix rows_of(const RealMatrix& m, RowRange range) {
  RealMatrix out(range.size(), m.cols());
  for (std::size_t r = 0; r < range.size(); ++r) {
    std::copy(m.row(range.begin + r).begin(), m.row(range.begin + r).end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

double LogGaborParams::orientation_angle(std::size_t orientation) const {
  return static_cast<double>(orientation) * std::numbers::pi / static_cast<double>(n_orientations);
}

void LogGaborParams::validate() const {
  if (f0_per_scale.empty() || n_orientations == 0) {
    throw Error(Errc::kInvalidArgument, "log-Gabor bank needs at least one scale and orientation");
  }
  for (double f0 : f0_per_scale) {
    if (!(f0 > 0.0 && f0 <= 0.5)) {
      throw Error(Errc::kInvalidArgument, "center frequency must lie in (0, 0.5]");
    }
  }
  if (!(sigma_ratio > 0.0 && sigma_ratio < 1.0)) {
    throw Error(Errc::kInvalidArgument, "sigma_ratio must lie in (0, 1)");
  }
  if (!(sigma_theta > 0.0)) throw Error(Errc::kInvalidArgument, "sigma_theta must be positive");
}

std::vector<double> LogGaborParams::octave_frequencies(std::size_t n_scales) {
  std::vector<double> f(n_scales);
  double f0 = 1.0 / 3.0;
  for (double& v : f) {
    v = f0;
    f0 /= 2.0;
  }
  return f;
}

double log_gabor_transfer(double r, double theta, double f0, double theta0,
                          const LogGaborParams& params) {
  if (r <= 0.0) return 0.0;
  const double log_sigma = std::log(params.sigma_ratio);
  const double lr = std::log(r / f0);
  const double radial = std::exp(-(lr * lr) / (2.0 * log_sigma * log_sigma));
  const double dtheta = wrap_angle(theta - theta0);
  const double angular =
      std::exp(-(dtheta * dtheta) / (2.0 * params.sigma_theta * params.sigma_theta));
  return radial * angular;
}

LogGaborBank::LogGaborBank(std::size_t rows, std::size_t cols, LogGaborParams params,
                           std::vector<RealMatrix> filters)
    : rows_(rows), cols_(cols), params_(std::move(params)), filters_(std::move(filters)) {}

const RealMatrix& LogGaborBank::filter(std::size_t scale, std::size_t orientation) const {
  if (scale >= params_.n_scales() || orientation >= params_.n_orientations) {
    throw Error(Errc::kFilterIndexOutOfRange,
                "filter (" + std::to_string(scale + 1) + ", " + std::to_string(orientation + 1) +
                    ") outside a " + std::to_string(params_.n_scales()) + "x" +
                    std::to_string(params_.n_orientations) + " bank");
  }
  return filters_[scale * params_.n_orientations + orientation];
}

LogGaborBank build_bank(std::size_t rows, std::size_t cols, const LogGaborParams& params) {
  if (rows < 8 || cols < 8) {
    throw Error(Errc::kGridTooSmall, "log-Gabor grid must be at least 8x8");
  }
  params.validate();
  std::vector<RealMatrix> filters;
  filters.reserve(params.n_filters());
  for (std::size_t s = 0; s < params.n_scales(); ++s) {
    for (std::size_t o = 0; o < params.n_orientations; ++o) {
      RealMatrix mask(rows, cols);
      const double theta0 = params.orientation_angle(o);
      double peak = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        const double fy = fft_frequency(i, rows);
        for (std::size_t j = 0; j < cols; ++j) {
          const double fx = fft_frequency(j, cols);
          const double v = log_gabor_transfer(std::hypot(fx, fy), std::atan2(fy, fx),
                                              params.f0_per_scale[s], theta0, params);
          mask(i, j) = v;
          peak = std::max(peak, v);
        }
      }
      for (double& v : mask.flat()) v /= peak;
      mask(0, 0) = 0.0;
      filters.push_back(std::move(mask));
    }
  }
  return LogGaborBank(rows, cols, params, std::move(filters));
}

RealMatrix apply_filter(const RealMatrix& values, const RealMatrix& mask) {
  if (!values.same_shape(mask)) {
    throw Error(Errc::kShapeMismatch, "mask grid does not match spectrogram grid");
  }
  detail::Fft2d fft(values.rows(), values.cols());
  const ComplexMatrix spectrum = fft.forward(values);
  return multiply_and_invert(fft, spectrum, mask);
}

std::vector<RealMatrix> apply_bank(const RealMatrix& values, const LogGaborBank& bank) {
  if (values.rows() != bank.rows() || values.cols() != bank.cols()) {
    throw Error(Errc::kShapeMismatch, "bank grid does not match spectrogram grid");
  }
  detail::Fft2d fft(values.rows(), values.cols());
  const ComplexMatrix spectrum = fft.forward(values);
  std::vector<RealMatrix> out;
  out.reserve(bank.size());
  for (const RealMatrix& mask : bank.filters()) {
    out.push_back(multiply_and_invert(fft, spectrum, mask));
  }
  return out;
}

RealMatrix average_bank(std::span<const RealMatrix> responses) {
  if (responses.empty()) throw Error(Errc::kEmptyInput, "no responses to average");
  RealMatrix sum(responses[0].rows(), responses[0].cols(), 0.0);
  for (const RealMatrix& r : responses) {
    if (!r.same_shape(sum)) throw Error(Errc::kShapeMismatch, "responses differ in shape");
    auto acc = sum.flat();
    const auto src = r.flat();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
  }
  const auto count = static_cast<double>(responses.size());
  for (double& v : sum.flat()) v /= count;
  return sum;
}

std::vector<double> flatten(const RealMatrix& m) { return m.storage(); }

std::array<RowRange, 3> spectrogram_bands(std::size_t rows) {
  std::array<RowRange, 3> bands;
  std::size_t begin = 0;
  for (std::size_t b = 0; b < 3; ++b) {
    // ceil((b + 1) * rows / 3)
    const std::size_t end = ((b + 1) * rows + 2) / 3;
    bands[b] = {begin, end};
    begin = end;
  }
  return bands;
}

std::vector<double> method1_feature(const FixedSpectrogram& spec, const LogGaborBank& bank,
                                    std::size_t scale, std::size_t orientation) {
  if (scale == 0 || orientation == 0) {
    throw Error(Errc::kFilterIndexOutOfRange, "scale and orientation are 1-based");
  }
  const RealMatrix& mask = bank.filter(scale - 1, orientation - 1);
  return flatten(apply_filter(spec.values, mask));
}

std::vector<double> method2_feature(const FixedSpectrogram& spec, const LogGaborBank& bank) {
  const auto responses = apply_bank(spec.values, bank);
  return flatten(average_bank(responses));
}

BandBanks::BandBanks(std::size_t rows, std::size_t cols, const LogGaborParams& params)
    : rows_(rows), cols_(cols), ranges_(spectrogram_bands(rows)) {
  if (rows != kPatchGridRows) {
    throw Error(Errc::kBadGrid, "patch method needs a " + std::to_string(kPatchGridRows) +
                                    "-row grid, got " + std::to_string(rows));
  }
  for (const RowRange& r : ranges_) banks_.push_back(build_bank(r.size(), cols, params));
}

std::vector<double> method3_feature(const FixedSpectrogram& spec, const BandBanks& bands) {
  if (spec.values.rows() != bands.rows() || spec.values.cols() != bands.cols()) {
    throw Error(Errc::kBadGrid, "spectrogram grid does not match the band banks");
  }
  std::vector<double> out;
  out.reserve(spec.values.size());
  for (std::size_t b = 0; b < 3; ++b) {
    const RealMatrix band = rows_of(spec.values, bands.ranges()[b]);
    const auto responses = apply_bank(band, bands.bank(b));
    const RealMatrix avg = average_bank(responses);
    out.insert(out.end(), avg.flat().begin(), avg.flat().end());
  }
  return out;
}

std::vector<double> method3_feature(const FixedSpectrogram& spec, const LogGaborBank& bank) {
  if (spec.values.rows() != kPatchGridRows) {
    throw Error(Errc::kBadGrid, "patch method needs a 128-row grid");
  }
  return method3_feature(spec, BandBanks(spec.values.rows(), spec.values.cols(), bank.params()));
}

}  // namespace sonoclass
