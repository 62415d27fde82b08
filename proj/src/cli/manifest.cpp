#include "delaytrack/cli/manifest.hpp"

#include <sstream>

#include <yaml-cpp/yaml.h>

#include "delaytrack/error.hpp"
#include "delaytrack/matrix_market.hpp"

namespace delaytrack::cli {

namespace fs = std::filesystem;

Regime parse_regime(const std::string& name) {
  if (name == "single") return Regime::single;
  if (name == "multi") return Regime::multi;
  if (name == "delay_param") return Regime::delay_param;
  if (name == "wams") return Regime::wams;
  throw Error(ErrorCode::unknown_regime,
              "unknown regime '" + name + "' (expected single, multi, delay_param or wams)");
}

Method parse_method(const std::string& name) {
  if (name == "euler") return Method::euler;
  if (name == "heun") return Method::heun;
  if (name == "rk4") return Method::rk4;
  throw Error(ErrorCode::configuration,
              "unknown method '" + name + "' (expected euler, heun or rk4)");
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::single:
      return "single";
    case Regime::multi:
      return "multi";
    case Regime::delay_param:
      return "delay_param";
    case Regime::wams:
      return "wams";
  }
  return "unknown";
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::euler:
      return "euler";
    case Method::heun:
      return "heun";
    case Method::rk4:
      return "rk4";
  }
  return "unknown";
}

namespace {

class Reader {
 public:
  explicit Reader(fs::path path) : path_(std::move(path)), base_(path_.parent_path()) {}

  [[noreturn]] void fail(ErrorCode code, const YAML::Node& at, const std::string& what) const {
    std::ostringstream msg;
    msg << path_.string() << ":" << (at.Mark().line >= 0 ? at.Mark().line + 1 : 0) << ": " << what;
    throw Error(code, msg.str());
  }

  YAML::Node require(const YAML::Node& parent, const char* key) const {
    const YAML::Node node = parent[key];
    if (!node) fail(ErrorCode::parse, parent, std::string("missing key '") + key + "'");
    return node;
  }

  template <class T>
  T as(const YAML::Node& node, const char* what) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(ErrorCode::parse, node, std::string("cannot read ") + what);
    }
  }

  template <class T>
  T get(const YAML::Node& parent, const char* key) const {
    return as<T>(require(parent, key), key);
  }

  template <class T>
  std::optional<T> maybe(const YAML::Node& parent, const char* key) const {
    const YAML::Node node = parent[key];
    if (!node) return std::nullopt;
    return as<T>(node, key);
  }

  SparseMatrix matrix(const YAML::Node& node, Index r, const char* what) const {
    const auto rel = as<std::string>(node, what);
    const fs::path file = fs::path(rel).is_absolute() ? fs::path(rel) : base_ / rel;
    if (!fs::exists(file))
      fail(ErrorCode::missing_file, node, std::string(what) + " file not found: " + file.string());
    SparseMatrix m;
    try {
      m = read_matrix_market(file);
    } catch (const Error& e) {
      fail(e.code(), node, e.what());
    }
    if (m.rows() != r || m.cols() != r) {
      std::ostringstream msg;
      msg << what << " is " << m.rows() << "x" << m.cols() << ", expected " << r << "x" << r;
      fail(ErrorCode::dimension, node, msg.str());
    }
    return m;
  }

  /// Either a plain path or {constant: path, slope: path}.
  AffineSlot slot(const YAML::Node& node, Index r, const char* what) const {
    AffineSlot out;
    if (node.IsMap()) {
      out.constant = matrix(require(node, "constant"), r, what);
      if (node["slope"]) out.slope = matrix(node["slope"], r, what);
    } else {
      out.constant = matrix(node, r, what);
    }
    return out;
  }

  DelayedLinearModel model(const YAML::Node& node, Index r, std::optional<Index> n_dyn) const {
    DelayedLinearModel m;
    m.E = matrix(require(node, "E"), r, "E");
    m.A0 = matrix(require(node, "A0"), r, "A0");
    m.n_dyn = n_dyn;
    if (const YAML::Node delays = node["delays"]) {
      if (!delays.IsSequence()) fail(ErrorCode::parse, delays, "'delays' must be a list");
      for (const auto& d : delays) {
        DelayTerm term;
        term.tau = get<double>(d, "tau");
        term.A = matrix(require(d, "A"), r, "delayed matrix");
        m.delays.push_back(std::move(term));
      }
    }
    for (const auto& diag : validate_model(m)) fail(ErrorCode::configuration, node, diag.message);
    return m;
  }

 private:
  fs::path path_;
  fs::path base_;
};

}  // namespace

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::missing_file, "manifest not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    std::ostringstream msg;
    msg << path.string() << ":" << e.mark.line + 1 << ": " << e.msg;
    throw Error(ErrorCode::parse, msg.str());
  }
  const Reader rd(path);
  if (!root.IsMap()) rd.fail(ErrorCode::parse, root, "manifest must be a mapping");
  const int version = rd.get<int>(root, "format_version");
  if (version != kManifestVersion)
    rd.fail(ErrorCode::parse, root["format_version"],
            "unsupported format_version " + std::to_string(version));

  const YAML::Node dims = rd.require(root, "dimensions");
  const auto r = rd.get<Index>(dims, "r");
  if (r < 1) rd.fail(ErrorCode::dimension, dims, "r must be positive");
  const auto n_dyn = rd.maybe<Index>(dims, "n_dyn");

  const YAML::Node fam = rd.require(root, "family");
  const auto kind = rd.get<std::string>(fam, "kind");
  const YAML::Node range_node = rd.require(fam, "range");
  if (!range_node.IsSequence() || range_node.size() != 2)
    rd.fail(ErrorCode::parse, range_node, "range must be [lo, hi]");
  const ParameterRange range{rd.as<double>(range_node[0], "range"),
                             rd.as<double>(range_node[1], "range")};
  if (!(range.lo < range.hi)) rd.fail(ErrorCode::configuration, range_node, "range needs lo < hi");
  const auto fd_step = rd.maybe<double>(fam, "fd_step");

  std::optional<ModelFamily> family;
  std::optional<DelayedLinearModel> delay_base;
  std::optional<Index> varying;
  try {
    if (kind == "constant") {
      family = ModelFamily::constant(rd.model(fam, r, n_dyn), range);
    } else if (kind == "delay_parameter") {
      const auto base = rd.model(fam, r, n_dyn);
      const auto index = rd.get<Index>(fam, "delay_index");
      if (index < 1 || index > base.delay_count())
        rd.fail(ErrorCode::configuration, fam["delay_index"],
                "delay_index must be between 1 and the number of delays");
      varying = index - 1;
      delay_base = base;
      family = ModelFamily::delay_parameter(base, *varying, range);
    } else if (kind == "affine") {
      AffineData data;
      data.E = rd.slot(rd.require(fam, "E"), r, "E");
      data.A0 = rd.slot(rd.require(fam, "A0"), r, "A0");
      data.n_dyn = n_dyn;
      if (const YAML::Node delays = fam["delays"]) {
        for (const auto& d : delays) {
          data.taus.push_back(rd.get<double>(d, "tau"));
          data.delayed.push_back(rd.slot(rd.require(d, "A"), r, "delayed matrix"));
        }
      }
      family = ModelFamily::affine(std::move(data), range, fd_step);
    } else if (kind == "tabulated") {
      TabulatedData data;
      const YAML::Node snaps = rd.require(fam, "snapshots");
      if (!snaps.IsSequence()) rd.fail(ErrorCode::parse, snaps, "'snapshots' must be a list");
      for (const auto& sn : snaps) data.snapshots.push_back({rd.get<double>(sn, "p"), rd.model(sn, r, n_dyn)});
      family = ModelFamily::tabulated(std::move(data), range, fd_step);
    } else {
      rd.fail(ErrorCode::configuration, fam["kind"],
              "unknown family kind '" + kind + "' (expected constant, affine, tabulated or delay_parameter)");
    }
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind(path.string() + ":", 0) == 0) throw;
    rd.fail(e.code(), fam, what);
  }

  TrackOptions tracking;
  double p_init = range.lo;
  tracking.p_fin = range.hi;
  if (const YAML::Node reg = root["regime"]) {
    const YAML::Node name = rd.require(reg, "kind");
    try {
      tracking.regime.regime = parse_regime(rd.as<std::string>(name, "regime kind"));
    } catch (const Error& e) {
      rd.fail(e.code(), name, e.what());
    }
    if (const auto index = rd.maybe<Index>(reg, "delay_index")) tracking.regime.delay_index = *index - 1;
    if (tracking.regime.regime == Regime::wams) {
      WamsSpec w;
      w.tau0 = rd.maybe<double>(reg, "tau0").value_or(family->evaluate(range.lo).max_delay());
      w.dropout_rate = rd.maybe<double>(reg, "dropout_rate").value_or(0.0);
      w.period = rd.maybe<double>(reg, "period").value_or(1.0);
      w.gamma_scale = rd.maybe<double>(reg, "gamma_scale").value_or(0.0);
      w.gamma_shape = rd.maybe<double>(reg, "gamma_shape").value_or(0.0);
      w.ideal_channel = rd.maybe<bool>(reg, "ideal_channel").value_or(false);
      try {
        w.validate();
      } catch (const Error& e) {
        rd.fail(e.code(), reg, e.what());
      }
      tracking.regime.wams = w;
    }
  } else {
    tracking.regime.regime = varying ? Regime::delay_param : Regime::multi;
  }
  if (varying) {
    if (tracking.regime.regime != Regime::delay_param)
      rd.fail(ErrorCode::configuration, root["regime"],
              "a delay_parameter family needs the delay_param regime");
    if (root["regime"] && root["regime"]["delay_index"] && tracking.regime.delay_index != *varying)
      rd.fail(ErrorCode::configuration, root["regime"]["delay_index"],
              "regime delay_index differs from the family's delay_index");
    tracking.regime.delay_index = *varying;
  } else if (tracking.regime.regime == Regime::delay_param) {
    rd.fail(ErrorCode::configuration, root["regime"],
            "the delay_param regime needs a delay_parameter family");
  }
  if ((tracking.regime.regime == Regime::single || tracking.regime.regime == Regime::wams) &&
      family->delay_count() != 1)
    rd.fail(ErrorCode::configuration, root["regime"],
            std::string(to_string(tracking.regime.regime)) + " regime needs exactly one delay");

  if (const YAML::Node tr = root["tracking"]) {
    p_init = rd.maybe<double>(tr, "p_init").value_or(p_init);
    tracking.p_fin = rd.maybe<double>(tr, "p_fin").value_or(tracking.p_fin);
    tracking.dp = rd.maybe<double>(tr, "dp").value_or(0.0);
    if (const auto m = rd.maybe<std::string>(tr, "method")) {
      try {
        tracking.method = parse_method(*m);
      } catch (const Error& e) {
        rd.fail(e.code(), tr["method"], e.what());
      }
    }
    tracking.corrector_every = rd.maybe<int>(tr, "corrector_every").value_or(tracking.corrector_every);
    tracking.corrector_tol = rd.maybe<double>(tr, "corrector_tol").value_or(tracking.corrector_tol);
    tracking.fold_eps = rd.maybe<double>(tr, "fold_eps").value_or(tracking.fold_eps);
    tracking.reinit = rd.maybe<bool>(tr, "reinit").value_or(false);
  }
  if (const YAML::Node in = root["init"]) {
    tracking.init.degree = rd.maybe<int>(in, "N").value_or(tracking.init.degree);
    tracking.init.count = rd.maybe<int>(in, "count").value_or(tracking.init.count);
    if (const YAML::Node shift = in["shift"]) {
      if (!shift.IsSequence() || shift.size() != 2) rd.fail(ErrorCode::parse, shift, "shift must be [re, im]");
      tracking.init.shift = Complex(rd.as<double>(shift[0], "shift"), rd.as<double>(shift[1], "shift"));
    }
  }
  if (!range.contains(p_init) || !range.contains(tracking.p_fin))
    rd.fail(ErrorCode::range, root["tracking"] ? root["tracking"] : root,
            "p_init and p_fin must lie inside the family range");

  return Manifest{path, std::move(*family), p_init, tracking, delay_base};
}

void select_varying_delay(Manifest& manifest, Index delay_index) {
  if (!manifest.delay_base)
    throw Error(ErrorCode::configuration, "--delay-index needs a delay_parameter family");
  if (delay_index < 0 || delay_index >= manifest.delay_base->delay_count())
    throw Error(ErrorCode::configuration, "--delay-index out of range");
  manifest.family =
      ModelFamily::delay_parameter(*manifest.delay_base, delay_index, manifest.family.range());
  manifest.tracking.regime.delay_index = delay_index;
}

}  // namespace delaytrack::cli
