// ratfact: range bases and factorizations of rational matrices given by
// descriptor realizations stored as JSON system files.

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ratfact/ratfact.hpp"

namespace fs = std::filesystem;
using namespace ratfact;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitFactorization = 3;
constexpr int kExitVerification = 4;

struct Options {
  std::vector<std::string> files;
  std::string zeros = "bad";
  std::string region;
  bool inner = false;
  bool stabilize = false;
  bool irreducible = false;
  bool json = false;
  double tol = 0.0;
  double boundary_offset = 0.0;
  double threshold = 1e-7;
  std::size_t grid = 32;
  std::uint64_t seed = 0;
  std::string out;
  std::string point = "0";
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string fmt(Complex z) {
  if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) return fmt(z.real());
  return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
}

std::string fmt(const EigenvalueList& l) {
  std::string s = "{";
  bool first = true;
  for (const Complex& z : l.finite) {
    s += (first ? "" : ", ") + fmt(z);
    first = false;
  }
  for (Index k : l.infinite_multiplicities)
    for (Index i = 0; i < k; ++i) {
      s += first ? "inf" : ", inf";
      first = false;
    }
  return s + "}";
}

class Command {
 public:
  Command(std::string name, const Options& o) : name_(std::move(name)), o_(o) {
    report_["schema_version"] = kReportSchemaVersion;
    report_["command"] = name_;
    report_["seed"] = o.seed;
  }

  ToleranceConfig tolerance() const {
    ToleranceConfig t;
    t.rank_rtol = o_.tol;
    t.boundary_offset = o_.boundary_offset;
    t.validate();
    return t;
  }

  DescriptorSystem load(std::size_t k, const char* role) {
    if (k >= o_.files.size())
      throw InputError(std::string("missing system file for ") + role);
    DescriptorSystem s = parse_system_file(o_.files[k]);
    Json& in = report_["inputs"][role];
    in = {{"path", o_.files[k]}, {"n", s.n()}, {"m", s.m()}, {"p", s.p()},
          {"ts", to_string(s.ts)}};
    return s;
  }

  RegionPartition region(TimeDomain ts) const {
    if (!o_.region.empty()) {
      const TimeDomain want = o_.region == "cont-stab" ? TimeDomain::continuous
                                                       : TimeDomain::discrete;
      if (want != ts)
        throw InputError("--region " + o_.region + " does not match the " +
                         to_string(ts) + "-time system");
    }
    return RegionPartition::stability(ts);
  }

  RangeOptions range_options() const {
    RangeOptions r;
    r.zeros = o_.zeros == "none"  ? ZerosPolicy::none
              : o_.zeros == "all" ? ZerosPolicy::all
                                  : ZerosPolicy::bad;
    r.inner = o_.inner;
    r.stabilize = o_.stabilize || o_.inner;
    r.make_irreducible = o_.irreducible;
    return r;
  }

  void factor(const std::string& key, const DescriptorSystem& s,
              const ToleranceConfig& tol) {
    const FactorCertificate c = certify(s, tol, o_.seed);
    Json j = certificate_to_json(c);
    j["p"] = s.p();
    j["m"] = s.m();
    if (!o_.out.empty()) {
      fs::create_directories(o_.out);
      const std::string path = (fs::path(o_.out) / (key + ".json")).string();
      write_system_file(path, s);
      j["file"] = path;
    }
    report_["factors"][key] = j;
    text_ << key << ": " << s.p() << "x" << s.m() << ", order " << c.order
          << ", normal rank " << c.normal_rank << ", McMillan degree "
          << c.mcmillan_degree << "\n  poles " << fmt(c.poles) << "\n  zeros "
          << fmt(c.zeros) << "\n";
  }

  // Records a residual and fails verification when it is above threshold.
  void residual(const std::string& key, const ResidualStats& r,
                const std::string& grid) {
    report_["residuals"][key] = residual_to_json(r, grid);
    const bool ok = r.points > 0 && r.max_residual <= o_.threshold;
    text_ << key << " residual " << fmt(r.max_residual) << " (" << r.points
          << " points, " << grid;
    if (r.skipped) text_ << ", " << r.skipped << " skipped";
    text_ << ")" << (ok ? "" : "  FAIL") << "\n";
    if (!ok) failed_.push_back(key);
  }

  Json& report() { return report_; }
  std::ostream& text() { return text_; }
  const Options& options() const { return o_; }

  int finish() {
    report_["status"] = failed_.empty() ? "ok" : "verification-failed";
    if (!o_.out.empty()) {
      fs::create_directories(o_.out);
      std::ofstream(fs::path(o_.out) / "report.json") << report_.dump(2) << '\n';
    }
    if (o_.json)
      std::cout << report_.dump(2) << '\n';
    else
      std::cout << text_.str();
    if (!failed_.empty()) {
      std::string what;
      for (const auto& f : failed_) what += (what.empty() ? "" : ", ") + f;
      std::cerr << "ratfact " << name_ << ": verification failed (" << what
                << " above " << fmt(o_.threshold) << ")\n";
      return kExitVerification;
    }
    return 0;
  }

 private:
  std::string name_;
  const Options& o_;
  Json report_;
  std::ostringstream text_;
  std::vector<std::string> failed_;
};

std::string boundary_grid(TimeDomain ts) {
  return ts == TimeDomain::continuous ? "imaginary axis" : "unit circle";
}

Complex parse_point(const std::string& s) {
  std::string t = s;
  for (char& c : t)
    if (c == ',') c = ' ';
  std::istringstream is(t);
  double re = 0.0, im = 0.0;
  if (!(is >> re)) throw InputError("--point: expected \"re\" or \"re,im\"");
  if (!(is >> im)) im = 0.0;
  std::string rest;
  if (is >> rest) throw InputError("--point: trailing characters in \"" + s + "\"");
  return {re, im};
}

int cmd_info(Command& c) {
  const ToleranceConfig tol = c.tolerance();
  const DescriptorSystem g = c.load(0, "system");
  const DescriptorSystem irr = irreducible_realization(g, tol);
  const DescriptorSystem min = minimal_realization(g, tol);
  c.report()["orders"] = {{"given", g.n()}, {"irreducible", irr.n()}, {"minimal", min.n()}};
  c.text() << "system " << g.p() << "x" << g.m() << ", " << to_string(g.ts)
           << ", order " << g.n() << " (irreducible " << irr.n() << ", minimal "
           << min.n() << ")\n";
  c.factor("system", g, tol);
  return c.finish();
}

int cmd_klf(Command& c) {
  const ToleranceConfig tol = c.tolerance();
  const DescriptorSystem g = c.load(0, "system");
  auto [M, N] = system_pencil(g);
  const KlfResult k = kronecker_like_form(M, N, tol);
  const KlfStructure& st = k.structure;
  Json fin = Json::array();
  for (const auto& e : k.finite_eigenvalues) fin.push_back(complex_to_json(e.value()));
  c.report()["klf"] = {{"rows", M.rows()},
                       {"cols", M.cols()},
                       {"right_indices", st.right_indices},
                       {"finite_dim", st.finite_dim},
                       {"finite_eigenvalues", fin},
                       {"infinite_blocks", st.infinite_blocks},
                       {"left_indices", st.left_indices}};
  c.text() << "system pencil " << M.rows() << "x" << M.cols() << "\n  right indices";
  for (Index i : st.right_indices) c.text() << " " << i;
  c.text() << "\n  finite part " << st.finite_dim << ":";
  for (const auto& e : k.finite_eigenvalues) c.text() << " " << fmt(e.value());
  c.text() << "\n  infinite blocks";
  for (Index i : st.infinite_blocks) c.text() << " " << i;
  c.text() << "\n  left indices";
  for (Index i : st.left_indices) c.text() << " " << i;
  c.text() << "\n";
  return c.finish();
}

int cmd_sklf(Command& c) {
  const ToleranceConfig tol = c.tolerance();
  DescriptorSystem g = c.load(0, "system");
  const RangeOptions ro = c.range_options();
  if (ro.make_irreducible) g = irreducible_realization(g, tol);
  const RegionPartition zr = zeros_region(ro.zeros, c.region(g.ts), g.ts);
  const SpecialKlf s = special_klf(g, zr, tol);
  Json bad = Json::array();
  for (const Complex& z : s.bad_zeros) bad.push_back(complex_to_json(z));
  c.report()["sklf"] = {{"n_rg", s.n_rg}, {"n_c", s.n_c},       {"n_bl", s.n_bl},
                        {"r", s.r},       {"m_n", s.m_n},       {"reciprocal", s.reciprocal},
                        {"shift", s.shift}, {"bad_zeros", bad}};
  c.text() << "n_rg " << s.n_rg << ", n_c " << s.n_c << ", n_bl " << s.n_bl << ", r "
           << s.r << ", m_n " << s.m_n << "\n";
  if (!s.bad_zeros.empty()) {
    c.text() << "zeros in the bl block:";
    for (const Complex& z : s.bad_zeros) c.text() << " " << fmt(z);
    c.text() << "\n";
  }
  return c.finish();
}

int cmd_range(Command& c) {
  const ToleranceConfig tol = c.tolerance();
  const DescriptorSystem g = c.load(0, "system");
  const RangeResult rr = range_basis(g, c.region(g.ts), c.range_options(), tol);
  c.report()["rank"] = rr.sklf.r;
  c.factor("R", rr.R, tol);
  if (c.options().inner)
    c.residual("inner", inner_residual(rr.R, frequency_grid(g.ts, c.options().grid)),
               boundary_grid(g.ts));
  return c.finish();
}

int report_factorization(Command& c, const FactorizationResult& f,
                         const char* left, const char* right,
                         const ToleranceConfig& tol, const DescriptorSystem& g) {
  c.report()["rank"] = f.rank;
  c.report()["kind"] = to_string(f.kind);
  c.factor(left, f.left, tol);
  c.factor(right, f.right, tol);
  c.residual("product", f.residual, "random sample");
  if (f.kind == FactorizationKind::inner_outer || c.options().inner)
    c.residual("inner", inner_residual(f.left, frequency_grid(g.ts, c.options().grid)),
               boundary_grid(g.ts));
  return c.finish();
}

int cmd_frf(Command& c, bool dual) {
  const ToleranceConfig tol = c.tolerance();
  const DescriptorSystem g = c.load(0, "system");
  const RegionPartition reg = c.region(g.ts);
  const RangeOptions ro = c.range_options();
  const std::uint64_t seed = c.options().seed;
  if (dual) {
    FactorizationResult f = dual_full_rank_factorize(g, reg, ro, tol, seed);
    // Inner check applies to the range factor, which is on the right here.
    c.report()["rank"] = f.rank;
    c.report()["kind"] = to_string(f.kind);
    c.factor("X", f.left, tol);
    c.factor("R", f.right, tol);
    c.residual("product", f.residual, "random sample");
    if (ro.inner)
      c.residual("coinner",
                 inner_residual(transpose(f.right), frequency_grid(g.ts, c.options().grid)),
                 boundary_grid(g.ts));
    return c.finish();
  }
  return report_factorization(c, full_rank_factorize(g, reg, ro, tol, seed), "R", "X",
                              tol, g);
}

int cmd_nrcf(Command& c) {
  const ToleranceConfig tol = c.tolerance();
  const DescriptorSystem g = c.load(0, "system");
  const CoprimeFactors cf = nrcf(g, tol, c.options().seed);
  c.factor("N", cf.N, tol);
  c.factor("M", cf.M, tol);
  c.residual("product", cf.residual, "random sample");
  const DescriptorSystem nm = stack_vertical(cf.N, cf.M);
  c.residual("normalization", inner_residual(nm, frequency_grid(g.ts, c.options().grid)),
             boundary_grid(g.ts));
  return c.finish();
}

int cmd_pinv(Command& c) {
  const ToleranceConfig tol = c.tolerance();
  const DescriptorSystem g = c.load(0, "system");
  const DescriptorSystem p = pseudo_inverse(g, tol);
  c.factor("pinv", p, tol);
  c.residual("moore_penrose",
             moore_penrose_residual(g, p, frequency_grid(g.ts, c.options().grid)),
             boundary_grid(g.ts));
  return c.finish();
}

int cmd_iofac(Command& c) {
  const ToleranceConfig tol = c.tolerance();
  const DescriptorSystem g = c.load(0, "system");
  return report_factorization(c, inner_outer(g, tol, c.options().seed), "inner",
                              "outer", tol, g);
}

int cmd_eval(Command& c) {
  const DescriptorSystem g = c.load(0, "system");
  const Complex z = parse_point(c.options().point);
  const CMatrix v = evaluate(g, z);
  const bool real = v.imag().cwiseAbs().maxCoeff() == 0.0 || v.size() == 0;
  c.report()["point"] = complex_to_json(z);
  c.report()["value"] = {{"real", matrix_to_json(v.real())},
                         {"imag", matrix_to_json(v.imag())}};
  c.text() << "G(" << fmt(z) << ") =\n";
  for (Index i = 0; i < v.rows(); ++i) {
    c.text() << " ";
    for (Index j = 0; j < v.cols(); ++j)
      c.text() << " " << std::setw(12) << (real ? fmt(v(i, j).real()) : fmt(v(i, j)));
    c.text() << "\n";
  }
  return c.finish();
}

int cmd_verify(Command& c) {
  const DescriptorSystem g = c.load(0, "system");
  const DescriptorSystem l = c.load(1, "left");
  const DescriptorSystem r = c.load(2, "right");
  if (l.ts != g.ts || r.ts != g.ts)
    throw InputError("verify: factors and system have different time domains");
  if (l.p() != g.p() || r.m() != g.m() || l.m() != r.p())
    throw InputError("verify: factor dimensions do not compose to the system");
  const auto grid = frequency_grid(g.ts, c.options().grid);
  c.residual("product", product_residual(g, l, r, grid), boundary_grid(g.ts));
  if (c.options().inner)
    c.residual("inner", inner_residual(l, grid), boundary_grid(g.ts));
  return c.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range bases and factorizations of rational matrices"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, std::size_t files) {
    sub->add_option("files", o.files, files == 1 ? "system file" : "system, left and right factor files")
        ->required()
        ->expected(static_cast<int>(files))
        ->check(CLI::ExistingFile);
    sub->add_flag("--json", o.json, "print the report as one JSON document");
    sub->add_option("--out", o.out, "directory for factor realizations and report.json");
    sub->add_option("--seed", o.seed, "seed for random evaluation points");
    sub->add_option("--grid", o.grid, "number of boundary grid points")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threshold", o.threshold, "verification threshold")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--tol", o.tol, "relative rank tolerance (0 = automatic)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--boundary-offset", o.boundary_offset,
                    "half-width of the boundary exclusion strip")
        ->check(CLI::NonNegativeNumber);
  };
  auto ranged = [&](CLI::App* sub) {
    sub->add_option("--zeros", o.zeros, "zeros kept in the range basis")
        ->check(CLI::IsMember({"none", "bad", "all"}));
    sub->add_option("--region", o.region, "stability region")
        ->check(CLI::IsMember({"cont-stab", "disc-stab"}));
    sub->add_flag("--inner", o.inner, "make the range basis inner");
    sub->add_flag("--stabilize", o.stabilize, "reflect unstable poles of the basis");
    sub->add_flag("--irreducible", o.irreducible, "reduce the realization first");
  };

  struct Entry {
    const char* name;
    const char* help;
    std::size_t files;
    bool ranged;
  };
  const Entry entries[] = {
      {"info", "poles, zeros, normal rank and McMillan degree", 1, false},
      {"klf", "Kronecker-like form of the system pencil", 1, false},
      {"sklf", "special Kronecker-like form block sizes", 1, true},
      {"range", "proper range basis R", 1, true},
      {"frf", "full-rank factorization G = R X", 1, true},
      {"dual-frf", "dual full-rank factorization G = X R", 1, true},
      {"nrcf", "normalized right coprime factorization G = N M^-1", 1, false},
      {"pinv", "Moore-Penrose pseudo-inverse", 1, false},
      {"iofac", "inner-quasi-outer factorization", 1, false},
      {"eval", "evaluate G at a point", 1, false},
      {"verify", "check G = L R (and L inner) on the boundary grid", 3, false},
  };
  std::map<std::string, CLI::App*> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    common(sub, e.files);
    if (e.ranged) ranged(sub);
    subs[e.name] = sub;
  }
  subs["eval"]->add_option("--point", o.point, "evaluation point \"re\" or \"re,im\"");
  subs["verify"]->add_flag("--inner", o.inner, "also require L∼L = I");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  std::string name;
  for (const auto& [n, sub] : subs)
    if (sub->parsed()) name = n;
  Command cmd(name, o);
  try {
    if (name == "info") return cmd_info(cmd);
    if (name == "klf") return cmd_klf(cmd);
    if (name == "sklf") return cmd_sklf(cmd);
    if (name == "range") return cmd_range(cmd);
    if (name == "frf") return cmd_frf(cmd, false);
    if (name == "dual-frf") return cmd_frf(cmd, true);
    if (name == "nrcf") return cmd_nrcf(cmd);
    if (name == "pinv") return cmd_pinv(cmd);
    if (name == "iofac") return cmd_iofac(cmd);
    if (name == "eval") return cmd_eval(cmd);
    return cmd_verify(cmd);
  } catch (const InputError& e) {
    std::cerr << "ratfact " << name << ": input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const VerificationError& e) {
    std::cerr << "ratfact " << name << ": " << e.what() << "\n";
    return kExitVerification;
  } catch (const EvaluationError& e) {
    std::cerr << "ratfact " << name << ": " << e.what() << " (rcond " << e.rcond() << ")\n";
    return kExitFactorization;
  } catch (const std::exception& e) {
    // Structure, boundary and factorization errors.
    std::cerr << "ratfact " << name << ": " << e.what() << "\n";
    return kExitFactorization;
  }
}
