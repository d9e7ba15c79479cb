#include "shapeinst/ssm.hpp"

#include <cmath>
#include <string>

#include "shapeinst/kernels.hpp"

namespace shapeinst {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::structural: return "structural";
    case ErrorKind::degenerate_geometry: return "degenerate_geometry";
    case ErrorKind::no_intersection: return "no_intersection";
    case ErrorKind::rank: return "rank";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::spec: return "spec";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

namespace {

template <typename FrameT>
void check_rectangular(const std::vector<FrameT>& frames, const char* what) {
  if (frames.empty()) return;
  const auto n = frames.front().rows();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].rows() != n) {
      throw Error(ErrorKind::structural,
                  std::string(what) + ": frame " + std::to_string(t) + " has " +
                      std::to_string(frames[t].rows()) + " vertices, expected " +
                      std::to_string(n));
    }
  }
}

template <typename FrameT>
DesignMatrix flatten_frames(const std::vector<FrameT>& frames) {
  check_rectangular(frames, "flatten");
  DesignMatrix m;
  const int dim = FrameT::ColsAtCompileTime;
  m.layout.dim = dim;
  m.layout.num_vertices = frames.empty() ? 0 : frames.front().rows();
  m.values.resize(static_cast<Eigen::Index>(frames.size()), m.layout.width());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& f = frames[t];
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (int c = 0; c < dim; ++c) {
        m.values(static_cast<Eigen::Index>(t), m.layout.index(i, c)) = f(i, c);
      }
    }
  }
  return m;
}

template <typename FrameT>
std::vector<FrameT> unflatten_frames(const DesignMatrix& m) {
  const int dim = FrameT::ColsAtCompileTime;
  if (m.layout.dim != dim || m.layout.width() != m.cols()) {
    throw Error(ErrorKind::structural, "unflatten: layout does not match matrix");
  }
  std::vector<FrameT> frames(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    auto& f = frames[static_cast<std::size_t>(t)];
    f.resize(m.layout.num_vertices, dim);
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (int c = 0; c < dim; ++c) f(i, c) = m.values(t, m.layout.index(i, c));
    }
  }
  return frames;
}

}  // namespace

ShapeSequence3D::ShapeSequence3D(std::vector<Frame3> frames,
                                 std::vector<Triangle> triangles)
    : frames_(std::move(frames)), triangles_(std::move(triangles)) {
  check_rectangular(frames_, "ShapeSequence3D");
  const auto n = num_vertices();
  for (std::size_t f = 0; f < triangles_.size(); ++f) {
    for (int idx : triangles_[f]) {
      if (idx < 0 || idx >= n) {
        throw Error(ErrorKind::structural,
                    "ShapeSequence3D: triangle " + std::to_string(f) +
                        " references vertex " + std::to_string(idx) +
                        " outside [0, " + std::to_string(n) + ")");
      }
    }
  }
}

ContourSequence2D::ContourSequence2D(std::vector<Frame2> frames, bool closed)
    : frames_(std::move(frames)), closed_(closed) {
  check_rectangular(frames_, "ContourSequence2D");
}

DesignMatrix flatten(const ShapeSequence3D& seq) { return flatten_frames(seq.frames()); }
DesignMatrix flatten(const ContourSequence2D& seq) { return flatten_frames(seq.frames()); }
DesignMatrix flatten(const std::vector<Frame3>& frames) { return flatten_frames(frames); }
DesignMatrix flatten(const std::vector<Frame2>& frames) { return flatten_frames(frames); }

std::vector<Frame3> unflatten3(const DesignMatrix& m) { return unflatten_frames<Frame3>(m); }
std::vector<Frame2> unflatten2(const DesignMatrix& m) { return unflatten_frames<Frame2>(m); }

Eigen::RowVectorXd flatten_frame(const Eigen::MatrixXd& frame) {
  Eigen::RowVectorXd row(frame.size());
  for (Eigen::Index i = 0; i < frame.rows(); ++i) {
    for (Eigen::Index c = 0; c < frame.cols(); ++c) row(i * frame.cols() + c) = frame(i, c);
  }
  return row;
}

Eigen::MatrixXd unflatten_row(const Eigen::Ref<const Eigen::RowVectorXd>& row, int dim) {
  if (dim <= 0 || row.size() % dim != 0) {
    throw Error(ErrorKind::structural, "unflatten_row: length " +
                                           std::to_string(row.size()) +
                                           " is not a multiple of " + std::to_string(dim));
  }
  const Eigen::Index n = row.size() / dim;
  Eigen::MatrixXd frame(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < dim; ++c) frame(i, c) = row(i * dim + c);
  }
  return frame;
}

Eigen::RowVectorXd NormalizationStats::apply(
    const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (row.size() != column_means.size()) {
    throw Error(ErrorKind::structural, "NormalizationStats::apply: expected length " +
                                           std::to_string(column_means.size()) + ", got " +
                                           std::to_string(row.size()));
  }
  Eigen::RowVectorXd out = row - column_means;
  if (mode == NormalizeMode::center_and_normalize) {
    for (Eigen::Index j = 0; j < out.size(); ++j) {
      if (column_norms(j) > 0.0) out(j) /= column_norms(j);
    }
  }
  return out;
}

std::pair<DesignMatrix, NormalizationStats> center_normalize(const DesignMatrix& m,
                                                             NormalizeMode mode) {
  if (m.rows() < 2) {
    throw Error(ErrorKind::structural, "center_normalize: need at least 2 rows");
  }
  NormalizationStats stats;
  stats.mode = mode;
  stats.column_means = m.values.colwise().mean();

  DesignMatrix out{m.values.rowwise() - stats.column_means, m.layout};
  if (mode == NormalizeMode::center_and_normalize) {
    stats.column_norms.resize(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      // Frozen vertices leave exactly-constant columns; centering zeroes them
      // up to rounding, so relative tolerance decides "constant".
      const double norm = out.values.col(j).norm();
      const double scale = m.values.col(j).cwiseAbs().maxCoeff();
      if (norm <= 1e-13 * std::max(scale, 1.0)) {
        out.values.col(j).setZero();
        stats.column_norms(j) = 0.0;
      } else {
        out.values.col(j) /= norm;
        stats.column_norms(j) = norm;
      }
    }
  }
  return {std::move(out), std::move(stats)};
}

double mean_distance_error(const Eigen::Ref<const Eigen::MatrixXd>& pred,
                           const Eigen::Ref<const Eigen::MatrixXd>& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw Error(ErrorKind::structural,
                "mean_distance_error: prediction has " + std::to_string(pred.rows()) +
                    " vertices, ground truth has " + std::to_string(truth.rows()));
  }
  if (pred.rows() == 0) return 0.0;
  return kernels::serial::vertex_distances(pred, truth).mean();
}

double shape_variation(const ShapeSequence3D& seq, std::size_t t) {
  const std::size_t n = seq.num_frames();
  if (n < 3 || t < 1 || t + 1 >= n) {
    throw Error(ErrorKind::out_of_range,
                "shape_variation: frame " + std::to_string(t) +
                    " has no neighbours on both sides (sequence of " + std::to_string(n) +
                    " frames)");
  }
  return mean_distance_error(seq.frame(t - 1), seq.frame(t + 1));
}

double one_sided_variation(const ShapeSequence3D& seq, std::size_t t) {
  const std::size_t n = seq.num_frames();
  if (n < 2 || t >= n) {
    throw Error(ErrorKind::out_of_range, "one_sided_variation: frame out of range");
  }
  const std::size_t other = t == 0 ? 1 : t - 1;
  return mean_distance_error(seq.frame(t), seq.frame(other));
}

}  // namespace shapeinst
