#pragma once

// Reference precoders: maximum-ratio, zero-forcing and random. Every stream
// with a nonzero channel gets an equal share of P_t.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pinchopt/error.hpp"
#include "pinchopt/rng.hpp"
#include "pinchopt/wmmse.hpp"

namespace pinchopt {

enum class BeamformerKind { wmmse, mrc, zf, random };

inline const char* to_string(BeamformerKind k) {
  switch (k) {
    case BeamformerKind::wmmse: return "wmmse";
    case BeamformerKind::mrc: return "mrc";
    case BeamformerKind::zf: return "zf";
    case BeamformerKind::random: return "random";
  }
  return "?";
}

inline BeamformerKind parse_beamformer(const std::string& s) {
  if (s == "wmmse") return BeamformerKind::wmmse;
  if (s == "mrc") return BeamformerKind::mrc;
  if (s == "zf") return BeamformerKind::zf;
  if (s == "random") return BeamformerKind::random;
  throw InvalidArgument("unknown beamformer '" + s + "'");
}

// Scale each nonzero column to norm^2 = P_t / (number of nonzero columns).
inline MatrixXcd equal_power_columns(MatrixXcd p, double total_power) {
  int active = 0;
  for (Eigen::Index m = 0; m < p.cols(); ++m) active += p.col(m).squaredNorm() > 0.0;
  if (active == 0) return p;
  const double per = std::sqrt(total_power / active);
  for (Eigen::Index m = 0; m < p.cols(); ++m) {
    const double n = p.col(m).norm();
    if (n > 0.0) p.col(m) *= per / n;
  }
  return p;
}

struct BeamformerReport {
  MatrixXcd p;
  bool regularized = false;  // zero-forcing fell back to a ridge pseudo-inverse
};

inline BeamformerReport baseline_beamformer_report(BeamformerKind kind, const MatrixXcd& h, double total_power,
                                                   Rng* rng = nullptr) {
  BeamformerReport out;
  switch (kind) {
    case BeamformerKind::mrc:
      out.p = h;
      break;
    case BeamformerKind::zf: {
      // Right pseudo-inverse of H^H: P = H (H^H H)^-1, so h_m^H p_i = 0 for i != m.
      const MatrixXcd gram = h.adjoint() * h;
      Eigen::FullPivLU<MatrixXcd> lu(gram);
      const double scale = gram.diagonal().real().sum() / std::max<Eigen::Index>(gram.rows(), 1);
      if (scale > 0.0 && lu.rank() == gram.rows() && lu.rcond() > 1e-12) {
        out.p = h * lu.inverse();
      } else {
        const MatrixXcd ridge = gram + MatrixXcd::Identity(gram.rows(), gram.cols()) * std::max(1e-9 * scale, 1e-300);
        out.p = h * ridge.ldlt().solve(MatrixXcd::Identity(gram.rows(), gram.cols()));
        out.regularized = true;
      }
      for (Eigen::Index m = 0; m < h.cols(); ++m)
        if (h.col(m).squaredNorm() == 0.0) out.p.col(m).setZero();
      break;
    }
    case BeamformerKind::random: {
      if (!rng) throw InvalidArgument("baseline_beamformer: random precoder needs a random stream");
      out.p.resize(h.rows(), h.cols());
      for (Eigen::Index m = 0; m < h.cols(); ++m)
        for (Eigen::Index k = 0; k < h.rows(); ++k) out.p(k, m) = {rng->normal(), rng->normal()};
      break;
    }
    case BeamformerKind::wmmse:
      throw InvalidArgument("baseline_beamformer: use wmmse_solve for the WMMSE precoder");
  }
  out.p = equal_power_columns(std::move(out.p), total_power);
  return out;
}

inline MatrixXcd baseline_beamformer(BeamformerKind kind, const MatrixXcd& h, double total_power,
                                     Rng* rng = nullptr) {
  return baseline_beamformer_report(kind, h, total_power, rng).p;
}

}  // namespace pinchopt
