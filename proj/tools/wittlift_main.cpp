// Command-line front end: certificate construction, the cube-lift obstruction
// test, coset-equation solving, isomorphism-witness checking, and independent
// re-verification of stored certificates.
//
// Exit codes: 0 success, 1 usage error, 2 solver failure, 3 verification
// failure.

#include "wittlift/sampling.hpp"
#include "wittlift/serialize.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace wittlift;

namespace {

struct CommonOpts {
  detail::u64 p = 3;
  int n = 4;
  int N = 8;
  detail::u64 seed = 1;
  std::string out;
  bool pretty = false;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("-p,--prime", c.p, "odd prime p");
  cmd->add_option("-n,--degree", c.n, "residue field degree");
  cmd->add_option("-N,--precision", c.N, "coefficient precision exponent");
  cmd->add_option("--seed", c.seed, "seed for random draws");
  cmd->add_option("-o,--out", c.out, "output file (default stdout)");
  cmd->add_flag("--pretty", c.pretty, "indent JSON output");
}

void emit(const json& j, const CommonOpts& c) {
  std::string text = c.pretty ? j.dump(2) : j.dump();
  text += "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(c.out);
    if (!f) throw usage_error("BadOutput", "cannot open " + c.out);
    f << text;
  }
}

// "17" or "c0,c1,..." as an element of the given context
WittElem parse_elem_arg(const std::string& s, const Ctx& cx) {
  std::vector<detail::u64> c(cx->deg, 0);
  size_t pos = 0, idx = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (idx >= c.size()) throw usage_error("BadElement", "too many coefficients");
    c[idx++] = std::stoull(tok) % cx->q;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return WittElem(cx, std::move(c), cx->N);
}

json solver_meta(const Sampler& s) {
  json j;
  j["seed"] = std::to_string(s.seed);
  j["draws"] = s.draws;
  return j;
}

int exit_code_for(const WittError& e) {
  switch (e.kind) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Solver: return 2;
    case ErrorKind::Verification: return 3;
    default: return 2;
  }
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw usage_error("BadInput", "cannot open " + path);
  json j;
  f >> j;
  return j;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact lifting certificates for supersingular Dieudonne modules"};
  app.require_subcommand(1);

  CommonOpts c_surface, c_threefold, c_obstruction, c_asw, c_iso, c_verify;

  auto* cmd_surface = app.add_subcommand("surface-lift", "build a rank-4 lift certificate");
  add_common(cmd_surface, c_surface);
  std::string sx;
  bool sx_random = false, sx_generic = false;
  int s_maxdeg = -1, s_count = 1, s_report_prec = -1;
  cmd_surface->add_option("--x", sx, "parameter x as decimal coefficients c0,c1,...");
  cmd_surface->add_flag("--x-random", sx_random, "draw x from the trace-free family");
  cmd_surface->add_flag("--x-random-generic", sx_generic, "draw x as a generic Teichmueller lift");
  cmd_surface->add_option("--max-degree", s_maxdeg, "residue degree cap for coset solving");
  cmd_surface->add_option("--count", s_count, "number of certificates");
  cmd_surface->add_option("--report-precision", s_report_prec, "precision of the emitted certificate");

  auto* cmd_threefold = app.add_subcommand("threefold-lift", "build a rank-6 lift certificate");
  add_common(cmd_threefold, c_threefold);
  std::string tx, ty, tz;
  bool t_random = false, t_generic = false;
  int t_maxdeg = -1, t_count = 1, t_retries = 32, t_report_prec = -1;
  cmd_threefold->add_option("--x", tx, "parameter x");
  cmd_threefold->add_option("--y", ty, "parameter y");
  cmd_threefold->add_option("--z", tz, "parameter z");
  cmd_threefold->add_flag("--xyz-random", t_random, "draw x,y,z from the trace-free family");
  cmd_threefold->add_flag("--xyz-random-generic", t_generic, "draw x,y,z generically");
  cmd_threefold->add_option("--max-degree", t_maxdeg, "residue degree cap for coset solving");
  cmd_threefold->add_option("--count", t_count, "number of certificates");
  cmd_threefold->add_option("--retries", t_retries, "coset re-draw bound");
  cmd_threefold->add_option("--report-precision", t_report_prec, "precision of the emitted certificate");

  auto* cmd_obstruction =
      app.add_subcommand("cube-obstruction", "test the cube-lift necessary condition");
  add_common(cmd_obstruction, c_obstruction);
  std::string ox, oy, oz = "0";
  bool presentation_complete = false;
  cmd_obstruction->add_option("--x", ox, "parameter x")->required();
  cmd_obstruction->add_option("--y", oy, "parameter y")->required();
  cmd_obstruction->add_option("--z", oz, "parameter z");
  cmd_obstruction->add_flag("--presentation-complete", presentation_complete,
                            "assert the presentation is exhaustive for the module");

  auto* cmd_asw = app.add_subcommand("solve-asw", "solve sigma^k(beta) - beta = x");
  add_common(cmd_asw, c_asw);
  std::string ax;
  int ak = 2, a_maxdeg = -1, a_target = -1;
  bool a_random = false;
  cmd_asw->add_option("-k,--kernel-degree", ak, "twist exponent k");
  cmd_asw->add_option("--x", ax, "right-hand side");
  cmd_asw->add_flag("--x-random", a_random, "draw the right-hand side generically");
  cmd_asw->add_option("--max-degree", a_maxdeg, "residue degree cap");
  cmd_asw->add_option("--target-prec", a_target, "digits to certify");

  auto* cmd_iso = app.add_subcommand("iso-check", "check an isomorphism witness");
  add_common(cmd_iso, c_iso);
  std::string iso_file;
  bool iso_demo = false;
  cmd_iso->add_option("--file", iso_file, "witness JSON file");
  cmd_iso->add_flag("--demo", iso_demo, "generate a seed-determined witness and check it");

  auto* cmd_verify = app.add_subcommand("verify", "re-verify a stored certificate");
  add_common(cmd_verify, c_verify);
  std::string cert_file;
  cmd_verify->add_option("file", cert_file, "certificate JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_surface->parsed()) {
      CommonOpts& c = c_surface;
      Sampler sampler(c.seed);
      json result = json::array();
      for (int t = 0; t < s_count; ++t) {
        WittElem x = [&] {
          if (!sx.empty()) {
            Ctx cx = WittContext::make(c.p, c.n, c.N);
            return parse_elem_arg(sx, cx);
          }
          if (sx_generic) {
            Ctx cx = WittContext::make(c.p, c.n, c.N);
            return sampler.generic(cx, false);
          }
          // trace-free default: draw at working precision in degree 4
          int nw = detail_lift::working_precision(c.p, c.N);
          Ctx c4 = WittContext::make(c.p, 4, nw);
          return sampler.tracefree(c4, true);
        }();
        LiftOptions opts;
        opts.asw.max_degree = s_maxdeg;
        opts.report_precision = s_report_prec > 0 ? s_report_prec : c.N;
        SurfaceLiftCertificate cert = surface_lift(x, opts);
        json j = surface_to_json(cert);
        j["meta"] = solver_meta(sampler);
        result.push_back(std::move(j));
      }
      emit(s_count == 1 ? result[0] : result, c);
      return 0;
    }
    if (cmd_threefold->parsed()) {
      CommonOpts& c = c_threefold;
      Sampler sampler(c.seed);
      json result = json::array();
      for (int t = 0; t < t_count; ++t) {
        WittElem x = WittElem(), y = WittElem(), z = WittElem();
        if (!tx.empty() || !ty.empty() || !tz.empty()) {
          Ctx cx = WittContext::make(c.p, c.n, c.N);
          x = parse_elem_arg(tx.empty() ? "0" : tx, cx);
          y = parse_elem_arg(ty.empty() ? "0" : ty, cx);
          z = parse_elem_arg(tz.empty() ? "0" : tz, cx);
        } else if (t_generic) {
          Ctx cx = WittContext::make(c.p, c.n, c.N);
          x = sampler.generic(cx, true);
          y = sampler.generic(cx, true);
          z = sampler.generic(cx, false);
        } else {
          int nw = detail_lift::working_precision(c.p, c.N);
          Ctx c4 = WittContext::make(c.p, 4, nw);
          x = sampler.tracefree(c4, true);
          y = sampler.tracefree(c4, true);
          z = sampler.tracefree(c4, false);
        }
        LiftOptions opts;
        opts.asw.max_degree = t_maxdeg;
        opts.retries = t_retries;
        opts.report_precision = t_report_prec > 0 ? t_report_prec : c.N;
        ThreefoldLiftCertificate cert = threefold_lift(x, y, z, opts);
        json j = threefold_to_json(cert);
        j["meta"] = solver_meta(sampler);
        result.push_back(std::move(j));
      }
      emit(t_count == 1 ? result[0] : result, c);
      return 0;
    }
    if (cmd_obstruction->parsed()) {
      CommonOpts& c = c_obstruction;
      Ctx cx = WittContext::make(c.p, c.n, c.N);
      WittElem x = parse_elem_arg(ox, cx), y = parse_elem_arg(oy, cx), z = parse_elem_arg(oz, cx);
      ObstructionVerdict v = cube_lift_obstruction(x, y, z, presentation_complete);
      json j;
      j["kind"] = "cube-obstruction";
      j["context"] = context_header(cx);
      j["x"] = elem_to_json(x);
      j["y"] = elem_to_json(y);
      j["z"] = elem_to_json(z);
      j["dependent"] = v.dependent;
      j["detail"] = v.detail;
      j["consequence"] = v.consequence;
      j["presentation_complete"] = v.presentation_complete;
      emit(j, c);
      return 0;
    }
    if (cmd_asw->parsed()) {
      CommonOpts& c = c_asw;
      Ctx cx = WittContext::make(c.p, c.n, c.N);
      Sampler sampler(c.seed);
      WittElem x = !ax.empty() ? parse_elem_arg(ax, cx) : sampler.generic(cx, false);
      AswOptions opts;
      opts.max_degree = a_maxdeg;
      opts.target_prec = a_target;
      AswSolution sol = solve_asw(ak, x, opts);
      json j;
      j["kind"] = "asw-solution";
      j["context"] = context_header(sol.beta.ctx);
      j["k"] = ak;
      j["x"] = elem_to_json(embed(x, sol.beta.ctx));
      j["beta"] = elem_to_json(sol.beta);
      j["extension_degree"] = sol.extension_degree_used;
      j["guarantee"] = sol.guarantee;
      j["meta"] = solver_meta(sampler);
      emit(j, c);
      return 0;
    }
    if (cmd_iso->parsed()) {
      CommonOpts& c = c_iso;
      IsoWitness w;
      if (!iso_file.empty()) {
        w = witness_from_json(load_json(iso_file));
      } else if (iso_demo) {
        Ctx cx = WittContext::make(c.p, 2, c.N);
        Sampler sampler(c.seed);
        WitnessBuilder wb(sampler.generic(cx, true), sampler.generic(cx, true),
                          sampler.generic(cx, false));
        WittElem x0 = wb.x, y0 = wb.y, z0 = wb.z;
        for (int s = 0; s < 4; ++s) {
          switch (sampler.below(4)) {
            case 0:
              wb.rescale(teichmuller(sampler.residue(cx, true)),
                         teichmuller(sampler.residue(cx, true)),
                         teichmuller(sampler.residue(cx, true)));
              break;
            case 1: wb.shear_21(sampler.generic(cx)); break;
            case 2: wb.shear_32(sampler.generic(cx)); break;
            case 3: wb.shear_31(sampler.generic(cx)); break;
          }
        }
        w = wb.witness(x0, y0, z0);
      } else {
        throw usage_error("BadInput", "iso-check needs --file or --demo");
      }
      bool mc = iso_matrix_check(w);
      EquationReport er = iso_equation_report(w);
      json j;
      j["kind"] = "iso-check";
      j["matrix_check"] = mc;
      json eqs;
      for (const auto& e : er.equations) eqs[e.name] = e.pass;
      j["equations"] = eqs;
      j["equations_all_hold"] = er.all_hold;
      j["dagger_congruence"] = mc ? json(dagger_congruence(w)) : json(nullptr);
      j["witness"] = witness_to_json(w);
      emit(j, c);
      return mc == er.all_hold ? 0 : 3;
    }
    if (cmd_verify->parsed()) {
      CommonOpts& c = c_verify;
      json j = load_json(cert_file);
      VerifyOutcome out = verify_certificate_json(j);
      json r;
      r["kind"] = "verify";
      r["verified"] = out.verified;
      r["matches_stored"] = out.matches_stored;
      r["recomputed"] = out.recomputed;
      emit(r, c);
      return (out.verified && out.matches_stored) ? 0 : 3;
    }
  } catch (const WittError& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
