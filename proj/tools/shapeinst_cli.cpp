// shapeinst: phantom generation, scan-plane finding, slicing, model fitting,
// single-frame instantiation and the validation studies.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "shapeinst/mesh_io.hpp"
#include "shapeinst/pipeline.hpp"

namespace fs = std::filesystem;
using namespace shapeinst;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::spec: return kExitConfig;
    case ErrorKind::rank:
    case ErrorKind::numerical: return kExitNumerical;
    default: return kExitData;
  }
}

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> regressor;
  std::optional<std::string> components;
  std::optional<std::string> ratio;
  std::optional<long> numx;
  std::optional<std::string> model;
  std::optional<std::string> contour;
};

std::vector<double> parse_ratio_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::spec, "--ratio: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw Error(ErrorKind::spec, "--ratio: empty grid");
  return out;
}

PipelineConfig build_config(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  if (o.out) c.out_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.regressor) c.regressors = {regressor_from_string(*o.regressor)};
  if (o.components) c.components = parse_component_range(*o.components);
  if (o.ratio) c.ratios = parse_ratio_grid(*o.ratio);
  if (o.numx) c.numx = *o.numx;
  if (o.model) c.model_file = *o.model;
  if (o.contour) c.contour_file = *o.contour;
  c.validate();
  return c;
}

void write(const fs::path& dir, const std::string& name, const std::string& content) {
  io::write_file_atomic(dir / name, content);
  std::cout << "wrote " << (dir / name).string() << '\n';
}

int cmd_phantom(const PipelineConfig& c) {
  PhantomSpec spec = c.phantom;
  spec.seed = c.seed;
  const auto seq = generate(spec);
  io::write_mesh_sequence(c.out_dir, seq);
  io::write_file_atomic(fs::path(c.out_dir) / "phantom.json", io::dump(io::to_json(spec)));
  std::cout << "phantom: " << seq.num_frames() << " frames, " << seq.num_vertices()
            << " vertices, " << seq.triangles().size() << " triangles -> " << c.out_dir << '\n';
  return 0;
}

int cmd_plane(const PipelineConfig& c) {
  const auto seq = load_shapes(c);
  const SpcaConfig scfg = spca_config(c, seq.num_vertices());
  const PlaneReport r = optimal_plane(seq, scfg);
  const fs::path out(c.out_dir);
  io::Json plane = {{"version", io::kFormatVersion},
                    {"plane", io::to_json(r.fit.plane)},
                    {"weighted_sq_residual", r.fit.weighted_sq_residual},
                    {"weighted_abs_residual", r.fit.weighted_abs_residual},
                    {"informative_vertices", r.contributions.selected.size()},
                    {"spca_status", r.loadings.status == SpcaStatus::converged ? "converged"
                                                                              : "max_iter_reached"}};
  write(out, "plane.json", io::dump(plane));
  write(out, "contributions.json",
        io::dump({{"version", io::kFormatVersion},
                  {"contributions", io::to_json(r.contributions)},
                  {"spca", io::to_json(r.loadings)}}));
  io::write_obj(out / "contributions.obj", r.mean_shape, seq.triangles(), r.contributions.contributions);
  std::cout << "wrote " << (out / "contributions.obj").string() << '\n';
  const auto& p = r.fit.plane;
  std::printf("plane origin (%.4f, %.4f, %.4f) normal (%.6f, %.6f, %.6f), %zu informative vertices\n",
              p.origin.x(), p.origin.y(), p.origin.z(), p.normal.x(), p.normal.y(), p.normal.z(),
              r.contributions.selected.size());
  return 0;
}

int cmd_slice(const PipelineConfig& c) {
  const auto seq = load_shapes(c);
  const ScanPlane plane = resolve_plane(c, seq);
  const auto contours = build_contour_sequence(seq, plane, c.numx);
  io::write_contour_sequence(c.out_dir, contours);
  io::write_file_atomic(fs::path(c.out_dir) / "plane.json",
                        io::dump({{"version", io::kFormatVersion}, {"plane", io::to_json(plane)}}));
  std::cout << "sliced " << contours.num_frames() << " frames at " << c.numx << " points -> "
            << c.out_dir << '\n';
  return 0;
}

int cmd_fit(const PipelineConfig& c) {
  const auto seq = load_shapes(c);
  const auto contours = resolve_contours(c, seq);
  const RegressorKind kind = c.regressors.size() == 1 ? c.regressors.front() : RegressorKind::kplsr;
  const SearchSpace space = search_space(c, kind);
  RegressorConfig cfg{kind, space.min_components, space.ratios.front()};
  const bool fixed = space.min_components == space.max_components &&
                     (kind == RegressorKind::plsr || space.ratios.size() == 1);
  if (!fixed) {
    const Selection sel = select_config(seq, contours, space);
    cfg = sel.best;
    std::cout << "selected " << config_label(cfg) << ", LOOCV mean error "
              << io::format_double(sel.best_mean_error) << " mm\n";
  }
  io::ModelFile m;
  m.config = cfg;
  m.model = fit_regressor(flatten(contours).values, flatten(seq).values, cfg);
  m.contour_points = contours.num_vertices();
  m.closed = contours.closed();
  m.triangles = seq.triangles();
  const fs::path path = fs::path(c.out_dir) / "model.json";
  io::save_model(path, m);
  std::cout << "wrote " << path.string() << " (" << config_label(cfg) << ")\n";
  return 0;
}

int cmd_instantiate(const PipelineConfig& c) {
  if (c.model_file.empty()) throw Error(ErrorKind::spec, "instantiate: --model is required");
  if (c.contour_file.empty()) throw Error(ErrorKind::spec, "instantiate: --contour is required");
  const io::ModelFile m = io::load_model(c.model_file);
  const Frame2 contour = io::read_contour_csv(c.contour_file);
  if (contour.rows() != m.contour_points) {
    throw Error(ErrorKind::structural, "instantiate: contour has " + std::to_string(contour.rows()) +
                                           " vertices, model expects numX = " +
                                           std::to_string(m.contour_points));
  }
  const Eigen::RowVectorXd x = flatten_frame(contour);
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::RowVectorXd y = m.model.predict(x);
  const auto t1 = std::chrono::steady_clock::now();
  const Frame3 mesh = unflatten_row(y, 3);
  const fs::path path = fs::path(c.out_dir) / "instance.obj";
  io::write_obj(path, mesh, m.triangles);
  const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  std::cout << "wrote " << path.string() << '\n';
  std::printf("prediction time: %.3f ms\n", ms);
  return 0;
}

int cmd_study(const PipelineConfig& c) {
  if (c.studies.empty()) {
    std::cout << "no studies selected; nothing to do\n";
    return 0;
  }
  const StudyOutputs outputs = run_studies(c);
  for (const auto& [name, content] : outputs) write(c.out_dir, name, content);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape instantiation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "JSON pipeline config");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", o.seed, "Phantom seed");
  app.add_option("--regressor", o.regressor, "plsr or kplsr");
  app.add_option("--components", o.components, "Component count or range, e.g. 4 or 1-18");
  app.add_option("--ratio", o.ratio, "Gaussian ratio or comma-separated grid");
  app.add_option("--numx", o.numx, "Contour points per frame");
  app.add_option("--model", o.model, "Model file for instantiate");
  app.add_option("--contour", o.contour, "Contour CSV for instantiate");

  auto* phantom = app.add_subcommand("phantom", "Generate a phantom mesh sequence");
  auto* plane = app.add_subcommand("plane", "Find the optimal scan plane");
  auto* slice = app.add_subcommand("slice", "Build the 2D contour sequence");
  auto* fit = app.add_subcommand("fit", "Fit a regression model on all frames");
  auto* inst = app.add_subcommand("instantiate", "Predict a 3D mesh from one contour");
  auto* study = app.add_subcommand("study", "Run the configured validation studies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const PipelineConfig c = build_config(o);
    if (phantom->parsed()) return cmd_phantom(c);
    if (plane->parsed()) return cmd_plane(c);
    if (slice->parsed()) return cmd_slice(c);
    if (fit->parsed()) return cmd_fit(c);
    if (inst->parsed()) return cmd_instantiate(c);
    if (study->parsed()) return cmd_study(c);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
