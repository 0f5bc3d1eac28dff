#pragma once

#include "ksdg/fields.hpp"
#include "ksdg/mesh.hpp"
#include "ksdg/u_step.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ksdg {

/// Terms of an initial-condition expression, summed:
///   const(c)
///   gauss(A, a, x0, y0)           A exp(-a ((x - x0)^2 + (y - y0)^2))
///   trig(A, f, kx, g, ky)         A f(kx pi x) g(ky pi y),  f, g in {sin, cos}
struct ConstantTerm {
  double value;
  bool operator==(const ConstantTerm&) const = default;
};

struct GaussianTerm {
  double amplitude;
  double rate;
  double x0;
  double y0;
  bool operator==(const GaussianTerm&) const = default;
};

enum class TrigFunction { Sin, Cos };

struct TrigTerm {
  double amplitude;
  TrigFunction fx;
  double kx;
  TrigFunction fy;
  double ky;
  bool operator==(const TrigTerm&) const = default;
};

using InitialTerm = std::variant<ConstantTerm, GaussianTerm, TrigTerm>;

struct InitialExpression {
  std::vector<InitialTerm> terms;

  double operator()(double x, double y) const;
  bool operator==(const InitialExpression&) const = default;
};

/// Throws ValidationError on malformed text.
InitialExpression parse_initial_expression(std::string_view text);
std::string to_string(const InitialExpression& expr);

struct InitialData {
  CellField u0;
  NodeField v0;
  std::vector<std::string> warnings;
};

/// u0 sampled at barycenters, v0 at vertices.
InitialData interpolate_initial_data(const TriMesh& mesh, const InitialExpression& u0, const InitialExpression& v0);

const std::vector<std::string>& preset_names();
bool is_preset(std::string_view name);

/// Initial data of a named preset. Throws ValidationError for unknown names.
InitialData preset_initial_conditions(std::string_view name, const TriMesh& mesh);

struct PresetDefinition {
  InitialExpression u0;
  InitialExpression v0;
  int tau;
  double dt;
  double t_end;
  /// The preset leaves v0 undefined (only meaningful with tau = 0).
  bool v0_undefined;
};

PresetDefinition preset_definition(std::string_view name);

struct RunConfig {
  MeshPattern pattern = MeshPattern::Mesh1;
  int n = 32;
  Rectangle domain;
  ModelParams params;
  /// Empty when the initial data is given explicitly.
  std::string preset;
  /// Explicit initial data; overrides the preset.
  std::optional<InitialExpression> u0;
  std::optional<InitialExpression> v0;
  std::string csv_path;
  std::string vtk_dir;
  std::vector<double> snapshot_times;
  NewtonSettings newton;
  FluxMode flux = FluxMode::Truncated;

  bool operator==(const RunConfig& other) const;
};

/// Parses the line-oriented `key = value` format with `[section]` headers.
/// Throws ParseError carrying the offending line number.
RunConfig load_config(std::string_view text);
RunConfig load_config_file(const std::string& path);

/// Writes every field explicitly; load_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Resolves preset and explicit expressions into fields on `mesh`.
InitialData initial_conditions(const RunConfig& config, const TriMesh& mesh);

} // namespace ksdg
