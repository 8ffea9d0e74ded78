// oamsim: fringes, CHSH values, mask search, LG decompositions and far-field
// images as files. Exit codes: 0 ok, 1 verification failed, 2 bad input,
// 3 I/O failure.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oamsim.hpp"

using namespace oamsim;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "0.3", "pi", "-pi/4", "3pi/4", "3*pi/4", "2.5e-1".
double parse_angle(std::string s) {
  std::erase_if(s, [](unsigned char c) { return std::isspace(c); });
  if (s.empty())
    throw ConfigurationError("empty angle");
  double sign = 1.0;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    sign = s[0] == '-' ? -1.0 : 1.0;
    pos = 1;
  }
  std::string body = s.substr(pos);
  auto number = [&](const std::string &t) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || end != t.data() + t.size())
      throw ConfigurationError("cannot parse angle '" + s + "'");
    return v;
  };
  std::size_t at = body.find("pi");
  if (at == std::string::npos)
    return sign * number(body);
  std::string coeff = body.substr(0, at);
  if (!coeff.empty() && coeff.back() == '*')
    coeff.pop_back();
  double value = coeff.empty() ? pi : number(coeff) * pi;
  std::string rest = body.substr(at + 2);
  if (!rest.empty()) {
    if (rest[0] != '/')
      throw ConfigurationError("cannot parse angle '" + s + "'");
    double den = number(rest.substr(1));
    if (den == 0.0)
      throw ConfigurationError("division by zero in angle '" + s + "'");
    value /= den;
  }
  return sign * value;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string &path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os)
    throw IoError("cannot write " + path);
  return os;
}

void finish(std::ofstream &os, const std::string &path) {
  os.flush();
  if (!os)
    throw IoError("write to " + path + " failed");
}

void print_headline(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  std::cout << buf << '\n';
}

// Plate options shared by several subcommands.
struct PlateArgs {
  std::string kind = "spiral";
  std::string file;
  std::string ell = "0.5", phi = "pi", alpha = "0";

  void add(CLI::App *app) {
    app->add_option("--plate", kind, "spiral | step | binary (binary needs --plate-file)");
    app->add_option("--plate-file", file, "plate description as JSON");
    app->add_option("--ell", ell, "spiral step");
    app->add_option("--phi", phi, "step / mask phase");
    app->add_option("--alpha", alpha, "edge orientation");
  }

  PhasePlate build() const {
    if (!file.empty())
      return plate_from_json_text(read_file(file));
    if (kind == "spiral")
      return SpiralPlate{parse_angle(ell), wrap_angle(parse_angle(alpha))};
    if (kind == "step")
      return StepPlate{parse_angle(phi), wrap_angle(parse_angle(alpha))};
    if (kind == "binary")
      throw ConfigurationError("binary plates are given with --plate-file");
    throw ConfigurationError("unknown plate '" + kind + "'");
  }
};

BellSettings parse_settings(const std::string &name, const std::string &angles, const Fringe &f) {
  if (!angles.empty()) {
    std::vector<double> v;
    std::stringstream ss(angles);
    std::string item;
    while (std::getline(ss, item, ','))
      v.push_back(parse_angle(item));
    if (v.size() != 5)
      throw ConfigurationError("--angles takes a1,a1p,a2,a2p,perp");
    return {v[0], v[1], v[2], v[3], v[4]};
  }
  if (name == "auto")
    return default_settings(f);
  if (name == "spiral")
    return BellSettings::spiral();
  if (name == "polarization")
    return BellSettings::polarization();
  throw ConfigurationError("unknown settings '" + name + "'");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Non-integer OAM plates: overlaps, CHSH, LG content and far fields"};
  app.require_subcommand(1);

  // fringe
  auto *fringe = app.add_subcommand("fringe", "rotation overlap curve or coincidence fringe as CSV");
  PlateArgs fringe_plate;
  fringe_plate.add(fringe);
  std::size_t fringe_samples = 360;
  bool fringe_coincidence = false, fringe_verify = false;
  int fringe_pump = 0;
  std::string fringe_out = "fringe.csv";
  fringe->add_option("--samples", fringe_samples, "uniform samples over [0, 2pi)");
  fringe->add_flag("--coincidence", fringe_coincidence, "two-photon coincidence fringe instead of the overlap curve");
  fringe->add_option("--pump", fringe_pump, "pump OAM for --coincidence");
  fringe->add_flag("--verify", fringe_verify, "recheck every sample by quadrature (1e-8)");
  fringe->add_option("--out", fringe_out);

  // bell
  auto *bell = app.add_subcommand("bell", "CHSH parameter as JSON, S on stdout");
  PlateArgs bell_plate;
  bell_plate.add(bell);
  std::string bell_fringe, bell_settings = "auto", bell_angles, bell_out = "bell.json";
  bool bell_exact = false;
  bell->add_option("--fringe", bell_fringe, "cos2 | constant (instead of a plate)");
  bell->add_option("--settings", bell_settings, "auto | spiral | polarization");
  bell->add_option("--angles", bell_angles, "explicit a1,a1p,a2,a2p,perp");
  bell->add_flag("--exact", bell_exact, "rational arithmetic for the parabolic fringes");
  bell->add_option("--out", bell_out);

  // search
  auto *search = app.add_subcommand("search", "maximise S over binary sector masks");
  std::size_t search_sectors = 6, search_budget = 20000, search_starts = SearchOptions{}.starts;
  std::uint64_t search_seed = 0;
  std::string search_phi = "pi", search_init, search_settings = "auto", search_angles,
              search_out = "search.json";
  search->add_option("--sectors", search_sectors);
  search->add_option("--phi", search_phi);
  search->add_option("--budget", search_budget, "S evaluations");
  search->add_option("--starts", search_starts);
  search->add_option("--seed", search_seed);
  search->add_option("--init", search_init, "starting mask JSON");
  search->add_option("--settings", search_settings, "auto | spiral | polarization");
  search->add_option("--angles", search_angles, "explicit a1,a1p,a2,a2p,perp");
  search->add_option("--out", search_out);

  // decompose
  auto *dec = app.add_subcommand("decompose", "greedy LG decomposition of a spiral plate output");
  std::string dec_ell = "0.5", dec_alpha = "0", dec_out = "decompose.csv";
  double dec_target = 0.87, dec_order_scale = 1.0;
  int dec_half_width = 60, dec_p_max = 120;
  dec->add_option("--ell", dec_ell);
  dec->add_option("--alpha", dec_alpha);
  dec->add_option("--target", dec_target, "cumulative power to reach");
  dec->add_option("--l-half-width", dec_half_width, "window |l - ell| <= w");
  dec->add_option("--p-max", dec_p_max);
  dec->add_option("--order-scale", dec_order_scale, "multiplies the Gauss-Laguerre order");
  dec->add_option("--out", dec_out);

  // farfield
  auto *ff = app.add_subcommand("farfield", "Fraunhofer image as 16-bit PGM plus JSON sidecar");
  PlateArgs ff_plate;
  ff_plate.add(ff);
  ff_plate.ell = "3.5";
  std::size_t ff_grid = 1024, ff_angles = 360;
  double ff_extent = 16.0;
  std::string ff_out = "farfield.pgm";
  ff->add_option("--grid", ff_grid);
  ff->add_option("--extent", ff_extent, "window side in waists");
  ff->add_option("--ring-samples", ff_angles);
  ff->add_option("--out", ff_out);

  // verify
  auto *ver = app.add_subcommand("verify", "closed forms against quadrature, JSON lines");
  std::size_t ver_grid = oracle::default_points;
  std::string ver_out = "verify.jsonl";
  ver->add_option("--grid", ver_grid);
  ver->add_option("--out", ver_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fringe) {
      PhasePlate plate = fringe_plate.build();
      auto os = open_out(fringe_out);
      double headline;
      if (fringe_coincidence) {
        auto f = coincidence_fringe(TwoPhotonState{fringe_pump}, plate, fringe_samples);
        if (fringe_verify) {
          for (const auto &s : f.samples) {
            double brute = std::norm(oracle::two_photon_amplitude(
                with_orientation(plate, 0.0), with_orientation(plate, s.delta), fringe_pump));
            if (std::abs(brute - s.probability) > 1e-8)
              throw OracleMismatch("coincidence sample at delta=" + std::to_string(s.delta) +
                                   " differs from quadrature");
          }
        }
        write_csv(os, f);
        headline = std::min_element(f.samples.begin(), f.samples.end(), [](auto &a, auto &b) {
                     return a.probability < b.probability;
                   })->probability;
      } else {
        auto c = sample_curve(plate, fringe_samples, fringe_verify);
        write_csv(os, c);
        headline = std::min_element(c.samples.begin(), c.samples.end(), [](auto &a, auto &b) {
                     return a.probability < b.probability;
                   })->probability;
      }
      finish(os, fringe_out);
      print_headline(headline);
    } else if (*bell) {
      Fringe f;
      std::optional<exact::Parabola> parabola;
      if (bell_fringe == "cos2") {
        f = cos2_fringe();
      } else if (bell_fringe == "constant") {
        f = constant_fringe(1.0);
      } else if (!bell_fringe.empty()) {
        throw ConfigurationError("unknown fringe '" + bell_fringe + "'");
      } else {
        PhasePlate plate = bell_plate.build();
        f = plate_fringe(plate);
        if (auto *s = std::get_if<SpiralPlate>(&plate); s && decompose(*s).lambda == 0.5)
          parabola = exact::Parabola::spiral_half;
        if (auto *s = std::get_if<StepPlate>(&plate)) {
          if (std::abs(wrap_angle(s->phi) - pi) < 1e-12)
            parabola = exact::Parabola::step_pi;
          else if (std::abs(wrap_angle(s->phi) - pi / 2) < 1e-12)
            parabola = exact::Parabola::step_half_pi;
        }
      }
      BellSettings settings = parse_settings(bell_settings, bell_angles, f);
      auto r = chsh_s(f, settings);
      nlohmann::json j = to_json(r);
      double headline = r.S;
      if (bell_exact) {
        if (!parabola || !bell_angles.empty())
          throw ConfigurationError("--exact covers the half-integer spiral and the pi, pi/2 steps "
                                   "at the named settings");
        bool polar = settings.perp_offset < pi - 1e-12;
        auto ex = exact::chsh(*parabola, polar ? exact::Settings::polarization() : exact::Settings::spiral());
        j["S_exact"] = std::to_string(ex.S.numerator()) + "/" + std::to_string(ex.S.denominator());
        headline = boost::rational_cast<double>(ex.S);
      }
      auto os = open_out(bell_out);
      os << j.dump(2) << '\n';
      finish(os, bell_out);
      print_headline(headline);
    } else if (*search) {
      std::optional<BinarySectorPlate> init;
      if (!search_init.empty()) {
        PhasePlate p = plate_from_json_text(read_file(search_init));
        if (auto *m = std::get_if<BinarySectorPlate>(&p))
          init = *m;
        else if (auto *s = std::get_if<StepPlate>(&p)) // a step plate is a half-plane mask
          init = make_binary_plate(s->phi, {{0.0, pi}}, s->alpha);
        else
          throw ConfigurationError("--init needs a binary or step plate");
      }
      const double phi = init ? init->phi : parse_angle(search_phi);
      BellSettings settings = BellSettings::spiral();
      if (!search_angles.empty() || search_settings != "auto")
        settings = parse_settings(search_settings, search_angles, cos2_fringe());
      else if (init)
        settings = default_settings(binary_fringe(*init));
      SearchOptions opt;
      opt.seed = search_seed;
      opt.starts = search_starts;
      auto r = search_max_s(search_sectors, phi, settings, search_budget, opt, init);
      nlohmann::json j = to_json(r);
      if (!r.degenerate) {
        auto cert = certify_s4(binary_fringe(r.best), settings);
        j["s4_certificate"] = {{"holds", cert.holds}, {"max_zero", cert.max_zero},
                               {"min_partner", cert.min_partner}};
      } else {
        std::cerr << "fringe is degenerate (constant or vanishing); S reported as " << r.best_S << '\n';
      }
      auto os = open_out(search_out);
      os << j.dump(2) << '\n';
      finish(os, search_out);
      print_headline(r.best_S);
    } else if (*dec) {
      const double ell = parse_angle(dec_ell);
      PhasePlate plate = SpiralPlate{ell, wrap_angle(parse_angle(dec_alpha))};
      if (!(dec_target > 0.0 && dec_target <= 1.0))
        throw ConfigurationError("--target must lie in (0, 1]");
      DecomposeOptions opt;
      opt.order_scale = dec_order_scale;
      auto d = decompose_plate_output(plate, LgMode::fundamental(), window_around(ell, dec_half_width, dec_p_max),
                                      dec_target, opt);
      auto os = open_out(dec_out);
      write_csv(os, d);
      finish(os, dec_out);
      if (d.incomplete)
        std::cerr << "target not reached: cumulative power " << d.cumulative() << " in l=[" << d.window.l_min
                  << ", " << d.window.l_max << "], p<=" << d.window.p_max << '\n';
      std::cout << d.count() << '\n';
    } else if (*ff) {
      PhasePlate plate = ff_plate.build();
      auto img = far_field(plate, LgMode::fundamental(), ff_grid, ff_extent);
      auto prof = azimuthal_profile(img, ff_angles);
      auto os = open_out(ff_out, true);
      write_pgm(os, img);
      finish(os, ff_out);
      nlohmann::json side = sidecar_json(img);
      side["ring_radius"] = prof.radius;
      side["asymmetry"] = prof.asymmetry;
      side["azimuthal_variance"] = prof.relative_variance;
      side["on_axis_ratio"] = on_axis_ratio(img);
      const std::string side_path = ff_out + ".json";
      auto js = open_out(side_path);
      js << side.dump(2) << '\n';
      finish(js, side_path);
      print_headline(prof.asymmetry);
    } else if (*ver) {
      auto reports = standard_sweep(ver_grid);
      auto os = open_out(ver_out);
      write_json_lines(os, reports);
      finish(os, ver_out);
      auto failed = std::count_if(reports.begin(), reports.end(), [](const auto &r) { return !r.pass; });
      std::cout << failed << '\n';
      return failed == 0 ? 0 : 1;
    }
  } catch (const IoError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument &e) { // ConfigurationError, UnsupportedAnalyzer
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DegenerateFringe &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const OracleMismatch &e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
