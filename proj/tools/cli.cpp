#include "gsp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "gsp/codec.hpp"
#include "gsp/error.hpp"
#include "gsp/filters.hpp"
#include "gsp/kernels.hpp"
#include "gsp/pgm.hpp"
#include "gsp/restoration.hpp"
#include "gsp/segmentation.hpp"
#include "gsp/spectral.hpp"

namespace gsp::cli {

void StylizeParams::validate() const {
  warp.validate();
  require(passes >= 1, ErrorCode::InvalidArgument, "stylize: passes must be >= 1");
  bilateral.validate();
  require(bilateral_radius >= 1, ErrorCode::InvalidArgument, "stylize: radius must be >= 1");
  require(edge_threshold >= 0.0 && edge_threshold <= 1.0, ErrorCode::InvalidArgument,
          "stylize: edge threshold must be in [0, 1]");
}

std::vector<double> sobel_magnitude(const ImagePlane& img) {
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  const std::size_t ch = img.channels();
  auto at = [&](long x, long y) {
    x = std::clamp(x, 0L, w - 1);
    y = std::clamp(y, 0L, h - 1);
    double acc = 0.0;
    for (std::size_t c = 0; c < ch; ++c) acc += img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c);
    return acc / static_cast<double>(ch);
  };
  const double scale = 1.0 / (4.0 * std::sqrt(2.0));
  std::vector<double> mag(img.pixel_count());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
      mag[static_cast<std::size_t>(y * w + x)] = std::sqrt(gx * gx + gy * gy) * scale;
    }
  }
  return mag;
}

ImagePlane stylize(const ImagePlane& img, const StylizeParams& params) {
  params.validate();
  if (img.empty()) return img;
  ImagePlane smoothed = params.smoother == Smoother::DomainTransform
                            ? dt_smooth_image(img, params.warp, params.passes)
                            : bilateral_apply(img, params.bilateral, params.bilateral_radius);
  const std::vector<double> mag = sobel_magnitude(smoothed);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    if (mag[i] > params.edge_threshold) {
      for (std::size_t c = 0; c < img.channels(); ++c) smoothed.samples()[i * img.channels() + c] = 0.0;
    }
  }
  return smoothed;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GraphFlags {
  double sigma_l = 1.0;
  double sigma_x = 0.1;
  int connectivity = 4;

  void add(CLI::App* app) {
    app->add_option("--sigma-l", sigma_l, "geometric bandwidth");
    app->add_option("--sigma-x", sigma_x, "photometric bandwidth");
    app->add_option("--connectivity", connectivity, "4 or 8")->check(CLI::IsMember({4, 8}));
  }
  GridWeightParams params(bool self_loops = false) const {
    return {sigma_l, sigma_x, connectivity, self_loops};
  }
};

struct WarpFlags {
  double alpha_g = 1.0;
  double alpha_p = 10.0;
  double sigma_s = 3.0;
  int passes = 3;

  void add(CLI::App* app) {
    app->add_option("--alpha-g", alpha_g, "geometric warp weight");
    app->add_option("--alpha-p", alpha_p, "photometric warp weight");
    app->add_option("--sigma-s", sigma_s, "smoothing scale in warped units");
    app->add_option("--passes", passes, "row/column passes");
  }
  WarpParams params() const { return {alpha_g, alpha_p, sigma_s}; }
};

// Accepts "0.25" or "1/256".
double parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  std::size_t used = 0;
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } else {
      const double num = std::stod(s.substr(0, slash), &used);
      if (used == slash) {
        const std::string den_s = s.substr(slash + 1);
        const double den = std::stod(den_s, &used);
        if (used == den_s.size() && den != 0.0) return num / den;
      }
    }
  } catch (const std::exception&) {
  }
  throw UsageError("not a number: '" + s + "'");
}

void add_noise(ImagePlane& img, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (double& s : img.samples()) s += dist(rng);
  img.clamp();
}

std::vector<double> label_samples(const std::vector<std::size_t>& labels) {
  const std::size_t top = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  std::vector<double> out(labels.size(), 0.0);
  if (top == 0) return out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = static_cast<double>(labels[i]) / static_cast<double>(top);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

// A verb does its validation in `check` (no I/O) and its work in `exec`.
struct Verb {
  std::function<void()> check;
  std::function<void()> exec;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph spectral image processing toolkit", "gsp"};
  app.require_subcommand(1);
  std::map<CLI::App*, Verb> verbs;

  std::string in_path;
  std::string out_path;
  auto io = [&](CLI::App* sub, bool need_in = true, bool need_out = true) {
    auto* i = sub->add_option("--in", in_path, "input path");
    auto* o = sub->add_option("--out", out_path, "output path");
    if (need_in) i->required();
    if (need_out) o->required();
  };

  // filter
  GraphFlags f_graph;
  std::string f_kind = "heat";
  std::string f_method = "exact";
  double f_t = 1.0, f_rho = 1.0, f_mu = 1.0;
  std::size_t f_pass = 1, f_order = 20;
  int f_radius = 2;
  {
    CLI::App* sub = app.add_subcommand("filter", "graph spectral or polynomial filtering");
    io(sub);
    f_graph.add(sub);
    sub->add_option("--filter", f_kind, "heat|tikhonov|lowpass|chenmap|bilateral")
        ->check(CLI::IsMember({"heat", "tikhonov", "lowpass", "chenmap", "bilateral"}));
    sub->add_option("--method", f_method, "exact|chebyshev|taylor")
        ->check(CLI::IsMember({"exact", "chebyshev", "taylor"}));
    sub->add_option("--t", f_t, "heat diffusion time");
    sub->add_option("--rho", f_rho, "Tikhonov weight");
    sub->add_option("--mu", f_mu, "ChenMAP weight");
    sub->add_option("--pass", f_pass, "low-pass count");
    sub->add_option("--order", f_order, "polynomial order");
    sub->add_option("--radius", f_radius, "bilateral window radius");
    auto spec = [&]() -> FilterSpec {
      if (f_kind == "heat") return filter::Heat{f_t};
      if (f_kind == "tikhonov") return filter::TikhonovInverse{f_rho};
      if (f_kind == "lowpass") return filter::IdealLowPass{f_pass};
      return filter::ChenMAP{f_mu};
    };
    verbs[sub] = {
        [&, spec] {
          f_graph.params(f_kind == "bilateral").validate();
          if (f_kind == "bilateral") {
            if (f_radius < 1) throw UsageError("--radius must be >= 1");
            return;
          }
          if (f_method == "taylor" && f_kind != "heat")
            throw UsageError("--method taylor is only defined for --filter heat");
          if (f_method != "exact" && (f_kind == "lowpass" || f_kind == "chenmap"))
            throw UsageError("--filter " + f_kind + " requires --method exact");
          if (f_order < 1) throw UsageError("--order must be >= 1");
          if (f_kind != "lowpass") (void)eval(spec(), 0.0);
        },
        [&, spec] {
          const ImagePlane img = load_pgm(in_path);
          ImagePlane res(img.width(), img.height(), img.channels());
          if (f_kind == "bilateral") {
            res = bilateral_apply(img, f_graph.params(true), f_radius);
          } else {
            const PixelGraph g = build_grid_graph(img, f_graph.params());
            const bool normalized = f_kind == "chenmap";
            const SparseSymOperator op = variation_operator(
                g, normalized ? OperatorKind::SymmetricNormalized : OperatorKind::Combinatorial);
            for (std::size_t c = 0; c < img.channels(); ++c) {
              const std::vector<double> x = img.channel(c);
              std::vector<double> y;
              if (f_method == "exact") {
                const GraphSpectrum spec_g = eigendecompose(op);
                if (normalized) {
                  const double mu = f_mu;
                  y = apply_response(spec_g, [mu](double l) {
                    return eval(filter::ChenMAP{mu}, 1.0 - l);
                  }, x);
                } else {
                  y = apply_exact(spec_g, spec(), x);
                }
              } else if (f_method == "taylor") {
                y = apply_polynomial(op, taylor_heat(f_t, f_order), x);
              } else {
                const FilterSpec s = spec();
                const ChebyshevFilter cheb = chebyshev_fit(
                    [s](double l) { return eval(s, l); }, f_order, default_lambda_max(op));
                y = apply_chebyshev(op, cheb, x);
              }
              res.set_channel(c, y);
            }
            res.clamp();
          }
          save_pgm(res, out_path);
        }};
  }

  // denoise
  std::string d_method = "tikhonov";
  double d_mu = 1.0, d_tau = 0.0, d_noise = 0.0;
  std::uint64_t d_seed = 1;
  GftDenoiseParams d_gft;
  bool d_soft = false;
  GraphFlags d_graph;
  {
    CLI::App* sub = app.add_subcommand("denoise", "graph-regularized denoising");
    io(sub);
    d_graph.add(sub);
    sub->add_option("--method", d_method, "tikhonov|gft")->check(CLI::IsMember({"tikhonov", "gft"}));
    sub->add_option("--mu", d_mu, "Tikhonov weight");
    sub->add_option("--tau", d_tau, "GFT threshold parameter");
    sub->add_option("--patch", d_gft.patch_size, "GFT patch size");
    sub->add_option("--cluster", d_gft.cluster_size, "patches per group");
    sub->add_option("--search", d_gft.search_radius, "patch search radius");
    sub->add_option("--stride", d_gft.stride, "patch stride");
    sub->add_option("--iters", d_gft.iterations, "GFT denoising iterations");
    sub->add_flag("--soft", d_soft, "soft thresholding");
    sub->add_option("--noise", d_noise, "add Gaussian noise of this sigma first");
    sub->add_option("--seed", d_seed, "noise seed");
    verbs[sub] = {
        [&] {
          if (d_mu < 0.0) throw UsageError("--mu must be >= 0");
          if (d_noise < 0.0) throw UsageError("--noise must be >= 0");
          d_graph.params().validate();
          d_gft.tau = d_tau;
          d_gft.mode = d_soft ? ThresholdMode::Soft : ThresholdMode::Hard;
          d_gft.sigma_l = d_graph.sigma_l;
          d_gft.sigma_x = d_graph.sigma_x;
          if (d_tau < 0.0) throw UsageError("--tau must be >= 0");
          if (d_gft.patch_size < 1 || d_gft.patch_size > 16)
            throw UsageError("--patch must be in [1, 16]");
          if (d_gft.cluster_size < 1 || d_gft.stride < 1 || d_gft.iterations < 1)
            throw UsageError("--cluster, --stride and --iters must be >= 1");
        },
        [&] {
          const ImagePlane clean = load_pgm(in_path);
          ImagePlane noisy = clean;
          add_noise(noisy, d_noise, d_seed);
          ImagePlane res;
          if (d_method == "tikhonov") {
            res = denoise_tikhonov_image(noisy, {d_mu, d_graph.params(), true});
          } else {
            res = denoise_gft_threshold(noisy, d_gft);
          }
          save_pgm(res, out_path);
          if (d_noise > 0.0) {
            out << "psnr_in=" << fmt(psnr(clean, noisy)) << " psnr_out=" << fmt(psnr(clean, res))
                << "\n";
          }
        }};
  }

  // deblur
  DeblurParams db;
  std::size_t db_blur = 3;
  GraphFlags db_graph;
  db_graph.connectivity = 8;
  {
    CLI::App* sub = app.add_subcommand("deblur", "Sinkhorn-normalized graph deblurring");
    io(sub);
    db_graph.add(sub);
    sub->add_option("--blur", db_blur, "box blur length (odd, 1 = none)");
    sub->add_option("--beta", db.beta, "fidelity weighting, >= -1");
    sub->add_option("--eta", db.eta, "regularization weight");
    sub->add_option("--iters", db.outer_iterations, "outer iterations");
    verbs[sub] = {
        [&] {
          db.weights = db_graph.params(true);
          db.validate();
          if (db_blur % 2 == 0) throw UsageError("--blur must be odd");
        },
        [&] {
          const ImagePlane img = load_pgm(in_path);
          const BlurOperator blur = db_blur == 1 ? BlurOperator::identity() : BlurOperator::box(db_blur);
          ImagePlane res = deblur(img, blur, db).image;
          res.clamp();
          save_pgm(res, out_path);
        }};
  }

  // encode / decode
  codec::CodecParams cp;
  std::string cp_q = "1/64";
  std::string cp_mode = "gft";
  double cp_lambda = 0.0;
  {
    CLI::App* sub = app.add_subcommand("encode", "block GFT / steerable DCT encoder");
    io(sub);
    sub->add_option("--block", cp.block_size, "block size (<= 32)");
    sub->add_option("--q", cp_q, "quantization step, e.g. 1/256");
    sub->add_option("--mode", cp_mode, "gft|steerable")->check(CLI::IsMember({"gft", "steerable"}));
    sub->add_option("--edge-threshold", cp.edge_threshold, "edge cut threshold in (0, 1]");
    CLI::Option* lambda_opt =
        sub->add_option("--lambda-rd", cp_lambda, "rate-distortion weight (default 0.1 Q^2)");
    verbs[sub] = {
        [&, lambda_opt] {
          cp.q = parse_fraction(cp_q);
          if (lambda_opt->count() > 0) cp.lambda_rd = cp_lambda;
          cp.mode = cp_mode == "gft" ? codec::Mode::Gft : codec::Mode::Steerable;
          cp.validate();
        },
        [&] {
          const ImagePlane img = load_pgm(in_path);
          const std::vector<std::uint8_t> bytes = codec::encode(img, cp);
          write_file(out_path, bytes);
          out << "bytes=" << bytes.size() << " bpp="
              << fmt(8.0 * static_cast<double>(bytes.size()) / static_cast<double>(img.pixel_count()))
              << "\n";
        }};
    CLI::App* dec = app.add_subcommand("decode", "decode a .gspc bitstream");
    io(dec);
    verbs[dec] = {[] {}, [&] { save_pgm(codec::decode(read_file(in_path)), out_path); }};
  }

  // segment
  double s_nu = 0.5;
  int s_conn = 4, s_iters = 10;
  {
    CLI::App* sub = app.add_subcommand("segment", "two-region Mumford-Shah by graph cuts");
    io(sub);
    sub->add_option("--nu", s_nu, "boundary weight");
    sub->add_option("--connectivity", s_conn, "4 or 8")->check(CLI::IsMember({4, 8}));
    sub->add_option("--iters", s_iters, "outer iterations");
    verbs[sub] = {
        [&] {
          if (s_nu < 0.0) throw UsageError("--nu must be >= 0");
          if (s_iters < 1) throw UsageError("--iters must be >= 1");
        },
        [&] {
          const ImagePlane img = load_pgm(in_path);
          const MumfordShahState st = mumford_shah_two_region(img, s_nu, s_conn, s_iters);
          std::vector<std::size_t> labels(st.labels.begin(), st.labels.end());
          for (auto& l : labels) l -= 1;
          save_pgm(ImagePlane(img.width(), img.height(), 1, label_samples(labels)), out_path);
          out << "c1=" << fmt(st.c1) << " c2=" << fmt(st.c2) << " energy=" << fmt(st.energy)
              << " iterations=" << st.iterations << "\n";
        }};
  }

  // ncut
  std::size_t n_regions = 2;
  double n_threshold = 1.0;
  GraphFlags n_graph;
  {
    CLI::App* sub = app.add_subcommand("ncut", "recursive normalized-cut segmentation");
    io(sub);
    n_graph.add(sub);
    sub->add_option("--regions", n_regions, "maximum number of regions");
    sub->add_option("--threshold", n_threshold, "largest normalized-cut cost to accept");
    verbs[sub] = {
        [&] {
          n_graph.params().validate();
          if (n_regions < 1) throw UsageError("--regions must be >= 1");
        },
        [&] {
          const ImagePlane img = load_pgm(in_path);
          const PixelGraph g = build_grid_graph(img, n_graph.params());
          const std::vector<std::size_t> labels = recursive_ncut(g, n_regions, n_threshold);
          save_pgm(ImagePlane(img.width(), img.height(), 1, label_samples(labels)), out_path);
        }};
  }

  // dt-smooth / retarget / stylize
  WarpFlags w_dt;
  {
    CLI::App* sub = app.add_subcommand("dt-smooth", "domain-transform edge-aware smoothing");
    io(sub);
    w_dt.add(sub);
    verbs[sub] = {
        [&] {
          w_dt.params().validate();
          if (w_dt.passes < 1) throw UsageError("--passes must be >= 1");
        },
        [&] { save_pgm(dt_smooth_image(load_pgm(in_path), w_dt.params(), w_dt.passes), out_path); }};
  }
  WarpFlags w_rt;
  std::size_t rt_width = 0;
  {
    CLI::App* sub = app.add_subcommand("retarget", "content-aware width change");
    io(sub);
    w_rt.add(sub);
    sub->add_option("--width", rt_width, "target width")->required();
    verbs[sub] = {
        [&] {
          w_rt.params().validate();
          if (rt_width < 2) throw UsageError("--width must be >= 2");
        },
        [&] { save_pgm(retarget_image(load_pgm(in_path), w_rt.params(), rt_width), out_path); }};
  }
  StylizeParams sp;
  WarpFlags w_st;
  GraphFlags st_graph;
  std::string st_smoother = "dt";
  {
    CLI::App* sub = app.add_subcommand("stylize", "smoothing plus dark edge contours");
    io(sub);
    w_st.add(sub);
    st_graph.sigma_l = 2.0;
    st_graph.connectivity = 8;
    st_graph.add(sub);
    sub->add_option("--smoother", st_smoother, "dt|bilateral")->check(CLI::IsMember({"dt", "bilateral"}));
    sub->add_option("--radius", sp.bilateral_radius, "bilateral window radius");
    sub->add_option("--edge-threshold", sp.edge_threshold, "Sobel threshold in [0, 1]");
    verbs[sub] = {
        [&] {
          sp.smoother = st_smoother == "dt" ? Smoother::DomainTransform : Smoother::Bilateral;
          sp.warp = w_st.params();
          sp.passes = w_st.passes;
          sp.bilateral = st_graph.params(true);
          sp.validate();
        },
        [&] { save_pgm(stylize(load_pgm(in_path), sp), out_path); }};
  }

  // spectrum
  GraphFlags sg;
  std::string sg_kind = "combinatorial";
  {
    CLI::App* sub = app.add_subcommand("spectrum", "graph Laplacian eigenvalues of an image as CSV");
    io(sub);
    sg.add(sub);
    sub->add_option("--laplacian", sg_kind, "combinatorial|normalized")
        ->check(CLI::IsMember({"combinatorial", "normalized"}));
    verbs[sub] = {
        [&] { sg.params().validate(); },
        [&] {
          const ImagePlane img = load_pgm(in_path);
          const PixelGraph g = build_grid_graph(img, sg.params());
          const GraphSpectrum spec = eigendecompose(variation_operator(
              g, sg_kind == "combinatorial" ? OperatorKind::Combinatorial
                                            : OperatorKind::SymmetricNormalized));
          std::string csv = "index,eigenvalue\n";
          for (std::size_t k = 0; k < spec.size(); ++k)
            csv += std::to_string(k) + "," + fmt(spec.eigenvalues()[k]) + "\n";
          write_file(out_path, std::vector<std::uint8_t>(csv.begin(), csv.end()));
        }};
  }

  // approx-error
  std::size_t ae_order = 5;
  double ae_lmax = 2.0;
  {
    CLI::App* sub = app.add_subcommand("approx-error",
                                       "Taylor vs Chebyshev squared error for exp(-lambda)");
    sub->add_option("--order", ae_order, "polynomial order");
    sub->add_option("--lmax", ae_lmax, "upper end of the spectrum");
    sub->add_option("--out", out_path, "CSV path (default: stdout)");
    verbs[sub] = {
        [&] {
          if (ae_order < 1) throw UsageError("--order must be >= 1");
          if (!(ae_lmax > 0.0)) throw UsageError("--lmax must be > 0");
        },
        [&] {
          const Response target = [](double l) { return std::exp(-l); };
          const PolynomialFilter taylor = taylor_heat(1.0, ae_order);
          const ChebyshevFilter cheb = chebyshev_fit(target, ae_order, ae_lmax);
          const std::vector<Response> approx{[&](double l) { return taylor.eval(l); },
                                             [&](double l) { return cheb.eval(l); }};
          const std::vector<ErrorRow> rows =
              approximation_error_table(target, approx, linspace(0.0, ae_lmax, 256));
          std::string csv = "lambda,taylor_sq_err,chebyshev_sq_err\n";
          for (const ErrorRow& r : rows)
            csv += fmt(r.lambda) + "," + fmt(r.sq_error[0]) + "," + fmt(r.sq_error[1]) + "\n";
          if (out_path.empty()) {
            out << csv;
          } else {
            write_file(out_path, std::vector<std::uint8_t>(csv.begin(), csv.end()));
          }
        }};
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Verb& verb = verbs.at(chosen);
  try {
    verb.check();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return 2;
  }
  try {
    verb.exec();
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gsp::cli
