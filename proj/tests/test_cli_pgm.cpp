#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "gsp/cli.hpp"
#include "gsp/error.hpp"
#include "gsp/pgm.hpp"
#include "support.hpp"

using namespace gsp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gsp_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

ImagePlane piecewise(std::size_t w, std::size_t h) {
  ImagePlane img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) img.at(x, y) = x < w / 2 ? 0.2 : (y < h / 2 ? 0.8 : 0.55);
  return img;
}

double field(const std::string& text, const std::string& key) {
  const std::size_t p = text.find(key + "=");
  REQUIRE(p != std::string::npos);
  return std::stod(text.substr(p + key.size() + 1));
}

}  // namespace

TEST_CASE("pgm parsing") {
  std::vector<std::uint8_t> one = bytes_of("P5\n1 1\n255\n");
  one.push_back(128);
  const ImagePlane img = parse_pgm(one);
  CHECK(img.width() == 1);
  CHECK(img.at(0, 0) == 128.0 / 255.0);
  CHECK(format_pgm(img) == one);

  std::vector<std::uint8_t> commented = bytes_of("P5 # comment\n2 # w\n1\n255\n");
  commented.push_back(0);
  commented.push_back(255);
  const ImagePlane c = parse_pgm(commented);
  CHECK(c.width() == 2);
  CHECK(c.at(1, 0) == 1.0);

  std::vector<std::uint8_t> truncated = bytes_of("P5\n3 2\n255\n");
  truncated.insert(truncated.end(), {1, 2, 3});
  try {
    parse_pgm(truncated);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("at byte 14") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_pgm(bytes_of("P2\n1 1\n255\n0")), Error);
  std::vector<std::uint8_t> deep = bytes_of("P5\n1 1\n65535\n");
  deep.insert(deep.end(), {0, 0});
  CHECK_THROWS_AS(parse_pgm(deep), Error);
}

TEST_CASE("pgm round trip is byte identical") {
  std::vector<std::uint8_t> file = bytes_of("P5\n7 5\n255\n");
  std::mt19937 rng(1);
  for (int i = 0; i < 35; ++i) file.push_back(static_cast<std::uint8_t>(rng() & 0xff));
  CHECK(format_pgm(parse_pgm(file)) == file);

  TempDir dir;
  save_pgm(parse_pgm(file), dir.file("a.pgm"));
  CHECK(read_file(dir.file("a.pgm")) == file);
  CHECK(format_pgm(load_pgm(dir.file("a.pgm"))) == file);
  CHECK_THROWS_AS(load_pgm(dir.file("missing.pgm")), Error);
  CHECK_THROWS_AS(format_pgm(ImagePlane(2, 2, 3)), Error);
}

TEST_CASE("cli usage errors exit 2") {
  const Run none = run_cli({});
  CHECK(none.code == 2);
  const Run verb = run_cli({"frobnicate"});
  CHECK(verb.code == 2);
  const Run flag = run_cli({"filter", "--in", "a.pgm", "--out", "b.pgm", "--bogus", "1"});
  CHECK(flag.code == 2);
  CHECK(flag.err.find("--in") != std::string::npos);
  CHECK(run_cli({"retarget", "--in", "a.pgm", "--out", "b.pgm"}).code == 2);
  CHECK(run_cli({"encode", "--in", "a.pgm", "--out", "b", "--q", "1/1024"}).code == 2);
  CHECK(run_cli({"denoise", "--in", "a.pgm", "--out", "b.pgm", "--mu", "-1"}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("cli processing errors exit 1") {
  TempDir dir;
  const Run r = run_cli({"dt-smooth", "--in", dir.file("missing.pgm"), "--out", dir.file("o.pgm")});
  CHECK(r.code == 1);
  CHECK(!r.err.empty());
  write_file(dir.file("junk.gspc"), bytes_of("not a bitstream"));
  CHECK(run_cli({"decode", "--in", dir.file("junk.gspc"), "--out", dir.file("o.pgm")}).code == 1);
}

TEST_CASE("approx-error table") {
  const Run r = run_cli({"approx-error", "--order", "5", "--lmax", "2"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "lambda,taylor_sq_err,chebyshev_sq_err");
  std::size_t rows = 0;
  double last_lambda = -1.0;
  double last_taylor = 0.0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string a, b, c;
    std::getline(cells, a, ',');
    std::getline(cells, b, ',');
    std::getline(cells, c, ',');
    const double lambda = std::stod(a);
    CHECK(lambda > last_lambda);
    last_lambda = lambda;
    last_taylor = std::stod(b);
    CHECK(std::stod(b) >= 0.0);
    CHECK(std::stod(c) >= 0.0);
  }
  CHECK(rows == 256);
  CHECK(last_lambda == doctest::Approx(2.0));
  double partial = 0.0;
  double term = 1.0;
  for (int k = 0; k <= 5; ++k) {
    partial += term;
    term *= -2.0 / (k + 1);
  }
  CHECK(last_taylor == doctest::Approx(std::pow(partial - std::exp(-2.0), 2)).epsilon(1e-6));
}

TEST_CASE("cli pipelines") {
  TempDir dir;
  const std::string in = dir.file("in.pgm");
  save_pgm(piecewise(32, 32), in);

  const Run d = run_cli({"denoise", "--in", in, "--out", dir.file("d.pgm"), "--method", "tikhonov",
                         "--mu", "2", "--noise", "0.1", "--seed", "4"});
  REQUIRE(d.code == 0);
  CHECK(field(d.out, "psnr_out") > field(d.out, "psnr_in"));
  const Run d2 = run_cli({"denoise", "--in", in, "--out", dir.file("d2.pgm"), "--method",
                          "tikhonov", "--mu", "2", "--noise", "0.1", "--seed", "4"});
  CHECK(d2.out == d.out);
  CHECK(read_file(dir.file("d.pgm")) == read_file(dir.file("d2.pgm")));

  const Run e = run_cli({"encode", "--in", in, "--out", dir.file("c.gspc"), "--q", "1/256"});
  REQUIRE(e.code == 0);
  CHECK(field(e.out, "bytes") < 32 * 32);
  REQUIRE(run_cli({"decode", "--in", dir.file("c.gspc"), "--out", dir.file("c.pgm")}).code == 0);
  CHECK(psnr(load_pgm(dir.file("c.pgm")), load_pgm(in)) >= 50.0);

  const Run s = run_cli({"segment", "--in", in, "--out", dir.file("s.pgm"), "--nu", "0.5"});
  REQUIRE(s.code == 0);
  CHECK(field(s.out, "energy") >= 0.0);

  for (const std::vector<std::string>& args :
       std::vector<std::vector<std::string>>{
           {"filter", "--filter", "heat", "--method", "chebyshev", "--order", "10"},
           {"filter", "--filter", "lowpass", "--method", "exact", "--pass", "20"},
           {"filter", "--filter", "bilateral"},
           {"deblur", "--blur", "3"},
           {"ncut", "--regions", "3"},
           {"dt-smooth"},
           {"retarget", "--width", "20"},
           {"stylize"}}) {
    std::vector<std::string> full = args;
    full.insert(full.begin() + 1, {"--in", in, "--out", dir.file("o.pgm")});
    const Run r = run_cli(full);
    CHECK_MESSAGE(r.code == 0, args[0] << ": " << r.err);
    if (r.code == 0) {
      const ImagePlane o = load_pgm(dir.file("o.pgm"));
      CHECK(o.height() == 32);
      CHECK(o.width() == (args[0] == "retarget" ? 20u : 32u));
    }
  }

  save_pgm(piecewise(6, 5), dir.file("small.pgm"));
  const Run sp = run_cli({"spectrum", "--in", dir.file("small.pgm"), "--out", dir.file("s.csv")});
  REQUIRE(sp.code == 0);
  const std::vector<std::uint8_t> csv_bytes = read_file(dir.file("s.csv"));
  const std::string csv(csv_bytes.begin(), csv_bytes.end());
  CHECK(csv.rfind("index,eigenvalue\n0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
}

TEST_CASE("stylize") {
  const ImagePlane flat(16, 16, 1, 0.6);
  cli::StylizeParams p;
  const ImagePlane same = cli::stylize(flat, p);
  for (double v : same.samples()) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));

  ImagePlane step(16, 16, 1, 0.2);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 8; x < 16; ++x) step.at(x, y) = 0.9;
  const ImagePlane out = cli::stylize(step, p);
  for (std::size_t y = 0; y < 16; ++y) {
    std::size_t dark = 0;
    for (std::size_t x = 0; x < 16; ++x) dark += out.at(x, y) == 0.0;
    CHECK(dark >= 1);
    CHECK(dark <= 2);
    CHECK(out.at(7, y) == 0.0);
    CHECK(out.at(0, y) > 0.0);
    CHECK(out.at(15, y) > 0.0);
  }

  p.edge_threshold = 1.0;
  const ImagePlane smooth = cli::stylize(step, p);
  const ImagePlane ref = dt_smooth_image(step, p.warp, p.passes);
  CHECK(testing::max_abs_diff(smooth.channel(0), ref.channel(0)) == 0.0);

  const std::vector<double> mag = cli::sobel_magnitude(step);
  for (double m : mag) {
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
  ImagePlane unit(3, 3, 1, 0.0);
  for (std::size_t y = 0; y < 3; ++y) unit.at(2, y) = 1.0;
  unit.at(1, 0) = unit.at(1, 1) = unit.at(1, 2) = 0.0;
  // Full-contrast step: |gx| = 4 at the centre, scaled by 1/(4 sqrt 2).
  CHECK(cli::sobel_magnitude(unit)[4] == doctest::Approx(1.0 / std::sqrt(2.0)));
}
