#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "delaytrack/cli/commands.hpp"
#include "delaytrack/cli/manifest.hpp"
#include "delaytrack/cli/svg_plot.hpp"
#include "delaytrack/cli/trajectory_csv.hpp"
#include "delaytrack/error.hpp"
#include "delaytrack/matrix_market.hpp"
#include "delaytrack/oracle.hpp"

using namespace delaytrack;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DELAYTRACK_DATA_DIR;
const std::string kCli = DELAYTRACK_CLI;

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("delaytrack-cli-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  static int counter = 0;
  const auto base = scratch() / ("run" + std::to_string(counter++));
  const std::string cmd = kCli + " " + args + " >" + base.string() + ".out 2>" + base.string() + ".err";
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(base.string() + ".out"), slurp(base.string() + ".err")};
}

ErrorCode load_error(const fs::path& manifest) {
  try {
    cli::load_manifest(manifest);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("manifest loaded without error");
  return ErrorCode::parse;
}

/// A scalar Hayes bundle in a fresh directory with a replaceable manifest body.
fs::path bundle(const std::string& name, const std::string& manifest) {
  const auto dir = scratch() / name;
  fs::create_directories(dir);
  for (const char* f : {"E.mtx", "A0.mtx", "A1.mtx"}) fs::copy_file(kData / "hayes" / f, dir / f, fs::copy_options::overwrite_existing);
  spit(dir / "manifest.yaml", manifest);
  return dir / "manifest.yaml";
}

const std::string kHayesFamily =
    "format_version: 1\n"
    "dimensions: {r: 1}\n"
    "family:\n"
    "  kind: constant\n"
    "  range: [0, 1]\n"
    "  E: E.mtx\n"
    "  A0: A0.mtx\n"
    "  delays:\n"
    "    - {tau: 1.0, A: A1.mtx}\n";

}  // namespace

TEST_CASE("bundled manifests load") {
  const auto h = cli::load_manifest(kData / "hayes" / "manifest.yaml");
  CHECK(h.family.kind() == FamilyKind::delay_parameter);
  CHECK(h.family.dimension() == 1);
  CHECK(h.tracking.regime.regime == Regime::delay_param);
  CHECK(h.p_init == 1.0);
  CHECK(h.tracking.p_fin == 2.0);
  CHECK(h.tracking.dp == 1e-3);

  const auto q = cli::load_manifest(kData / "quadratic" / "manifest.yaml");
  CHECK(q.family.kind() == FamilyKind::affine);
  CHECK(q.tracking.init.degree == 0);
  CHECK(q.family.evaluate(0.5).A0.coeff(1, 1) == Catch::Approx(-0.5));
}

TEST_CASE("manifest errors carry distinct codes and line anchors") {
  CHECK(load_error(bundle("unknown_regime", kHayesFamily + "regime: {kind: sideways}\n")) ==
        ErrorCode::unknown_regime);
  CHECK(load_error(bundle("bad_version", "format_version: 7\n")) == ErrorCode::parse);

  auto dim = bundle("dimension", kHayesFamily);
  spit(dim, std::string(kHayesFamily).replace(kHayesFamily.find("{r: 1}"), 6, "{r: 3}"));
  CHECK(load_error(dim) == ErrorCode::dimension);

  auto gone = bundle("gone", kHayesFamily);
  fs::remove(gone.parent_path() / "A1.mtx");
  CHECK(load_error(gone) == ErrorCode::missing_file);

  auto broken = bundle("broken", kHayesFamily);
  spit(broken.parent_path() / "A1.mtx", "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 oops\n");
  CHECK(load_error(broken) == ErrorCode::malformed_matrix);

  try {
    cli::load_manifest(bundle("line", kHayesFamily + "regime:\n  kind: sideways\n"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("manifest.yaml:11:") != std::string::npos);
  }
}

TEST_CASE("trajectory CSV round-trips exactly") {
  Trajectory tr;
  for (int k = 0; k < 20; ++k)
    tr.samples.push_back(TrackState::from(0.1 * k + 1e-17 * k, Complex(std::sin(k) / 3.0, std::exp(-k) / 7.0),
                                          ComplexVector::Ones(1), 1e-13 * k));
  tr.events.push_back({EventKind::axis_crossing, 0.55, Complex(0, 1), ""});
  tr.events.push_back({EventKind::fold, 0.55, Complex(0, 0), ""});
  std::stringstream buf;
  cli::write_trajectory_csv(buf, tr);
  const auto rows = cli::read_trajectory_csv(buf);
  REQUIRE(rows.size() == tr.samples.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].p == tr.samples[k].p);
    CHECK(rows[k].s_r == tr.samples[k].s_r);
    CHECK(rows[k].s_i == tr.samples[k].s_i);
    CHECK(rows[k].residual == tr.samples[k].residual);
  }
  CHECK(rows[6].event == "axis_crossing;fold");
  CHECK(rows[5].event.empty());
}

TEST_CASE("CSV quoting follows RFC 4180") {
  CHECK(cli::csv_field("plain") == "plain");
  CHECK(cli::csv_field("a,b") == "\"a,b\"");
  CHECK(cli::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  const auto f = cli::split_csv_line("1,\"a,b\",\"x\"\"y\",");
  REQUIRE(f.size() == 4);
  CHECK(f[1] == "a,b");
  CHECK(f[2] == "x\"y");
  CHECK(f[3].empty());
}

TEST_CASE("SVG rendering") {
  cli::PlotSpec spec{"t <1>", "x", "y", {{{0, 1, 2}, {1, -1, 0.5}}}, {{1.0, 0.0}}, true};
  const auto svg = cli::render_svg(spec);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.find("t &lt;1&gt;") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);
}

TEST_CASE("track command on the Hayes fixture") {
  const auto out = scratch() / "hayes.csv";
  const auto prefix = scratch() / "hayes";
  const auto r = run("track " + (kData / "hayes" / "manifest.yaml").string() + " --out " + out.string() +
                     " --svg " + prefix.string());
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  const auto rows = cli::read_trajectory_csv(in);
  REQUIRE(rows.size() == 1001);
  CHECK(rows.back().p == 2.0);
  const auto truth = hayes_roots(0.0, -1.0, 2.0, 2).roots;
  const Complex last(rows.back().s_r, rows.back().s_i);
  double best = 1e9;
  for (const Complex s : truth) best = std::min(best, std::abs(s - last));
  CHECK(best < 1e-6);
  CHECK(fs::exists(prefix.string() + "-locus.svg"));
  CHECK(fs::exists(prefix.string() + "-damping.svg"));

  // bit-identical rerun
  const auto again = run("track " + (kData / "hayes" / "manifest.yaml").string());
  CHECK(again.out == slurp(out));
}

TEST_CASE("margin command reports the analytic delay margin") {
  const auto r = run("margin " + (kData / "hayes" / "manifest.yaml").string());
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    ++n;
    const auto f = cli::split_csv_line(line);
    REQUIRE(f.size() == 2);
    CHECK(std::abs(std::stod(f[0]) - std::numbers::pi / 2) < 1e-6);
    CHECK(std::abs(std::stod(f[1]) - 1.0) < 1e-6);
  }
  CHECK(n == 1);
}

TEST_CASE("margin without crossings exits 1") {
  CHECK(run("margin " + (kData / "quadratic" / "manifest.yaml").string()).code == 1);
}

TEST_CASE("validate command on the quadratic family") {
  const auto r = run("validate " + (kData / "quadratic" / "manifest.yaml").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("max_distance,matched_fraction") != std::string::npos);
  CHECK(r.out.find(",1\r\n", r.out.find("max_distance")) != std::string::npos);
}

TEST_CASE("fold truncates with exit 3 and continues with --reinit") {
  const auto m = (kData / "fold" / "manifest.yaml").string();
  const auto cut = run("track " + m);
  CHECK(cut.code == 3);
  CHECK(cut.out.find("fold") != std::string::npos);
  const auto cont = run("track " + m + " --reinit");
  CHECK(cont.code == 0);
  CHECK(cont.out.find("reinit") != std::string::npos);
}

TEST_CASE("exit codes for configuration and numerical failures") {
  CHECK(run("track " + bundle("cli_regime", kHayesFamily + "regime: {kind: sideways}\n").string()).code == 2);
  CHECK(run("track /nonexistent/manifest.yaml").code == 2);
  CHECK(run("track " + (kData / "hayes" / "manifest.yaml").string() + " --method leapfrog").code == 2);
  CHECK(run("track " + (kData / "hayes" / "manifest.yaml").string() + " --p-fin 9").code == 2);
  CHECK(run("track " + (kData / "hayes" / "manifest.yaml").string() + " --init-from 5,0").code == 4);
}

TEST_CASE("spectrum command") {
  const auto r = run("spectrum " + (kData / "hayes" / "manifest.yaml").string() + " --p 1.0 --count 2");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("s_r,s_i,residual", 0) == 0);
  CHECK(r.out.find("-0.3181") != std::string::npos);
}

TEST_CASE("gen writes a loadable bundle") {
  const auto dir = scratch() / "gen";
  const auto r = run("gen --r 20 --density 0.2 --mu 2 --seed 5 --out " + dir.string());
  REQUIRE(r.code == 0);
  const auto m = cli::load_manifest(dir / "manifest.yaml");
  CHECK(m.family.dimension() == 20);
  CHECK(m.family.delay_count() == 2);
  const auto direct = rand_ddae(20, 20, 0.2, 2, 5);
  CHECK(DenseMatrix(m.family.evaluate(0.0).A0) == DenseMatrix(direct.A0));
  const auto s = run("spectrum " + (dir / "manifest.yaml").string() + " --count 3");
  CHECK(s.code == 0);
}

TEST_CASE("in-process command dispatch maps errors") {
  std::ostringstream out, err;
  cli::CommandFlags flags;
  CHECK(cli::cmd_track("/nonexistent.yaml", flags, out, err) == cli::kConfigError);
  CHECK(err.str().find("missing_file") != std::string::npos);
  CHECK_THROWS_AS(cli::parse_complex_pair("1;2"), Error);
  CHECK(cli::parse_complex_pair("-0.5,2") == Complex(-0.5, 2.0));
}
