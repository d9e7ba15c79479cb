#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shapeinst/error.hpp"

namespace shapeinst {

using Frame3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Frame2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Triangle = std::array<int, 3>;

/// N corresponded meshes sharing one triangle list. Vertex i of every frame is
/// the same material point.
class ShapeSequence3D {
 public:
  ShapeSequence3D() = default;
  /// Throws Error(structural) on ragged frames or out-of-range indices.
  ShapeSequence3D(std::vector<Frame3> frames, std::vector<Triangle> triangles);

  std::size_t num_frames() const { return frames_.size(); }
  Eigen::Index num_vertices() const {
    return frames_.empty() ? 0 : frames_.front().rows();
  }
  const Frame3& frame(std::size_t t) const { return frames_.at(t); }
  const std::vector<Frame3>& frames() const { return frames_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

 private:
  std::vector<Frame3> frames_;
  std::vector<Triangle> triangles_;
};

/// N corresponded planar contours, frame t synchronized with 3D frame t.
class ContourSequence2D {
 public:
  ContourSequence2D() = default;
  ContourSequence2D(std::vector<Frame2> frames, bool closed);

  std::size_t num_frames() const { return frames_.size(); }
  Eigen::Index num_vertices() const {
    return frames_.empty() ? 0 : frames_.front().rows();
  }
  bool closed() const { return closed_; }
  const Frame2& frame(std::size_t t) const { return frames_.at(t); }
  const std::vector<Frame2>& frames() const { return frames_; }

 private:
  std::vector<Frame2> frames_;
  bool closed_ = true;
};

/// Describes how a row of a design matrix maps back to vertex coordinates.
/// Ordering is interleaved per vertex: (x1, y1, z1, x2, ...).
struct Layout {
  Eigen::Index num_vertices = 0;
  int dim = 0;

  Eigen::Index width() const { return num_vertices * dim; }
  Eigen::Index index(Eigen::Index vertex, int coord) const {
    return vertex * dim + coord;
  }
};

struct DesignMatrix {
  Eigen::MatrixXd values;
  Layout layout;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

DesignMatrix flatten(const ShapeSequence3D& seq);
DesignMatrix flatten(const ContourSequence2D& seq);
DesignMatrix flatten(const std::vector<Frame3>& frames);
DesignMatrix flatten(const std::vector<Frame2>& frames);

/// Single frame as a row vector in the interleaved layout.
Eigen::RowVectorXd flatten_frame(const Eigen::MatrixXd& frame);
Eigen::MatrixXd unflatten_row(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                              int dim);

std::vector<Frame3> unflatten3(const DesignMatrix& m);
std::vector<Frame2> unflatten2(const DesignMatrix& m);

enum class NormalizeMode { center_only, center_and_normalize };

struct NormalizationStats {
  Eigen::RowVectorXd column_means;
  // Euclidean norm of each centered column; 0 marks a constant column that
  // was centered but left unscaled. Empty in center_only mode.
  Eigen::RowVectorXd column_norms;
  NormalizeMode mode = NormalizeMode::center_only;

  Eigen::RowVectorXd apply(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

std::pair<DesignMatrix, NormalizationStats> center_normalize(
    const DesignMatrix& m, NormalizeMode mode);

/// Mean over vertices of the Euclidean vertex-to-vertex distance.
double mean_distance_error(const Eigen::Ref<const Eigen::MatrixXd>& pred,
                           const Eigen::Ref<const Eigen::MatrixXd>& truth);

/// Mean vertex distance between frames t-1 and t+1. Boundary frames throw
/// Error(out_of_range).
double shape_variation(const ShapeSequence3D& seq, std::size_t t);

/// One-sided stand-in used for boundary frames in reports: distance between
/// the frame and its only neighbour.
double one_sided_variation(const ShapeSequence3D& seq, std::size_t t);

}  // namespace shapeinst
