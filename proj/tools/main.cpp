// Command-line front end: spectral analysis, hyperbolicity certificates,
// semiconjugacy solves, equivariance verification, and demo action writers.
//
// Exit codes: 0 success, 2 not certified, 3 no semiconjugacy / residual above
// tolerance, 64 usage or input error, 70 internal numerical failure.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semiconj/semiconj.hpp"

namespace {

using namespace semiconj;

constexpr int kExitOk = 0;
constexpr int kExitNotCertified = 2;
constexpr int kExitNoSemiconjugacy = 3;
constexpr int kExitUsage = 64;
constexpr int kExitNumerical = 70;

int exit_code_for(errc c) {
  switch (c) {
    case errc::bad_argument:
    case errc::parse_error:
    case errc::io_error:
    case errc::not_unimodular:
      return kExitUsage;
    case errc::not_certified:
    case errc::insufficient_span:
    case errc::conjugator_not_certified:
      return kExitNotCertified;
    default:
      return kExitNumerical;
  }
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string fmt_eigenvalue(const std::complex<double>& z) {
  std::ostringstream os;
  os << std::setprecision(10) << z.real();
  if (std::abs(z.imag()) > 1e-14) os << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

/// Shared options selecting the action: an action file or a built-in preset.
struct ActionSource {
  std::string spec_path;
  std::string preset;
  double eps = 0.05;
  int dim = 3;  // elementary preset dimension
  int res = 0;

  void attach(CLI::App* cmd, bool with_res = true) {
    auto* spec = cmd->add_option("--spec", spec_path, "action file (see docs for the format)")
                     ->check(CLI::ExistingFile);
    auto* preset_opt =
        cmd->add_option("--preset", preset,
                        "built-in action: sanov | cat | elementary | rotation | conjugated | twist")
            ->check(CLI::IsMember(
                {"sanov", "cat", "elementary", "rotation", "conjugated", "twist"}));
    spec->excludes(preset_opt);
    preset_opt->excludes(spec);
    cmd->add_option("--eps", eps, "perturbation amplitude for presets")->capture_default_str();
    cmd->add_option("-n,--dim", dim, "torus dimension for the elementary preset")
        ->check(CLI::Range(2, 8))
        ->capture_default_str();
    if (with_res)
      cmd->add_option("--res", res, "grid resolution per axis (0 = default for n)")
          ->check(CLI::NonNegativeNumber);
  }

  bool given() const { return !spec_path.empty() || !preset.empty(); }

  /// Materializes the action; phi_true is filled for the conjugated preset.
  ActionSpec make(std::optional<GridFunction>* phi_true = nullptr) const {
    if (!spec_path.empty()) return load_action(spec_path, res);
    if (preset == "sanov") return make_sanov(eps, res);
    if (preset == "cat") return make_cat(eps, res);
    if (preset == "elementary") return make_elementary(dim, eps, res);
    if (preset == "rotation") return make_rotation();
    if (preset == "twist") return make_sanov_twist(eps, res);
    if (preset == "conjugated") {
      OracleAction oracle = make_conjugated_sanov(eps, res);
      if (phi_true) *phi_true = std::move(oracle.phi_true);
      return std::move(oracle.action);
    }
    fail(errc::bad_argument, "no action given: pass --spec FILE or --preset NAME");
  }
};

void print_matrix(std::ostream& os, const IntMatrix& A, const std::string& indent) {
  for (int i = 0; i < A.n(); ++i) {
    os << indent << "[";
    for (int j = 0; j < A.n(); ++j) os << " " << A(i, j);
    os << " ]\n";
  }
}

// --- spectral ---------------------------------------------------------------

int run_spectral(const std::string& matrix_text, const ActionSource& src,
                 const std::string& word_text) {
  IntMatrix A(1);
  std::string label;
  if (!matrix_text.empty()) {
    A = parse_matrix(matrix_text);
    A.require_unimodular();
    label = matrix_text;
  } else {
    if (!src.given() || word_text.empty())
      fail(errc::bad_argument, "spectral needs either -m MATRIX or --spec/--preset with -w WORD");
    const ActionSpec action = src.make();
    const Word w = parse_word(word_text, action.names());
    A = word_matrix(w, action.matrices());
    label = "word '" + word_to_string(w, action.names()) + "'";
  }

  std::cout << "matrix (" << label << "), n = " << A.n() << ":\n";
  print_matrix(std::cout, A, "  ");
  const Splitting split = compute_splitting(A);
  std::cout << "eigenvalues:\n";
  for (const auto& z : split.eigenvalues)
    std::cout << "  " << fmt_eigenvalue(z) << "   |lambda| = " << fmt(std::abs(z), 10) << "\n";
  std::cout << "splitting: dim E = " << split.dim_E << ", dim F = " << split.dim_F << "\n";
  std::cout << "hyperbolic: " << (split.hyperbolic() ? "yes" : "no")
            << "   unit-modulus spectrum: " << (split.has_unit ? "yes" : "no") << "\n";
  if (split.dim_E > 0)
    std::cout << "min expansion on E = " << fmt(split.min_expansion, 10) << "\n";
  if (split.dim_F > 0)
    std::cout << "max modulus on F = " << fmt(split.max_nonexpanding, 10) << "\n";

  if (split.dim_E > 0) {
    const Eigen::MatrixXd m_inv = restricted_inverse(A, split);
    const auto norms = restricted_inverse_norms(m_inv, 24);
    std::cout << "restricted inverse norms |(A^-1|E)^i|_2:\n";
    for (std::size_t i = 1; i < norms.size() && i <= 6; ++i)
      std::cout << "  i=" << i << ": " << fmt(norms[i]) << "\n";
    const Truncation tr = choose_truncation(norms, kTolTail, kMaxN);
    std::cout << "series truncation for tail <= " << fmt(kTolTail) << ": N = " << tr.N
              << " terms (geometric decay q = " << fmt(tr.q) << " per " << tr.k << " steps)\n";
  } else {
    std::cout << "expanding subspace is trivial; the series construction does not apply\n";
  }
  return kExitOk;
}

// --- certify ----------------------------------------------------------------

int run_certify(const ActionSource& src, int word_len) {
  const ActionSpec action = src.make();
  const auto mats = action.matrices();
  const auto names = action.names();
  const HyperbolicityCertificate cert = certify_weak_hyperbolicity(mats, word_len);
  std::cout << "action: n = " << action.n << ", " << mats.size() << " generator(s)\n";
  std::cout << "searched reduced words up to length " << word_len << "\n";
  if (cert.certified) {
    std::cout << "weak hyperbolicity: VERIFIED at length " << cert.checked_length
              << " (expanding spans reach rank " << cert.achieved_rank << " of " << action.n
              << ")\n";
  } else {
    std::cout << "weak hyperbolicity: NOT VERIFIED up to length " << cert.checked_length
              << " (rank " << cert.achieved_rank << " of " << action.n << ")\n";
  }
  if (!cert.witnesses.empty()) {
    std::cout << "witness words:\n";
    for (std::size_t i = 0; i < cert.witnesses.size(); ++i) {
      const Splitting s = compute_splitting(cert.witness_matrices[i]);
      std::cout << "  " << word_to_string(cert.witnesses[i], names) << "   dim E = " << s.dim_E
                << "\n";
    }
  }
  return cert.certified ? kExitOk : kExitNotCertified;
}

// --- solve ------------------------------------------------------------------

std::string describe_source(const ActionSource& src) {
  if (!src.spec_path.empty()) return "file " + src.spec_path;
  std::ostringstream os;
  os << "preset " << src.preset << " (eps = " << src.eps;
  if (src.preset == "elementary") os << ", n = " << src.dim;
  os << ")";
  return os.str();
}

std::string render_report(const ActionSpec& action, const ActionSource& src,
                          const SemiconjugacyResult& r) {
  const auto names = action.names();
  std::ostringstream os;
  os << "semiconjugacy solve report\n";
  os << "==========================\n";
  os << "action: " << describe_source(src) << "\n";
  os << "n = " << action.n << ", generators:";
  for (const auto& g : action.generators) os << " " << g.name;
  os << "\n";
  os << "grid resolution = " << r.res << " per axis\n";
  os << "\nconfig:\n";
  os << "  tol_tail = " << fmt(r.config.tol_tail) << "\n";
  os << "  max_N = " << r.config.max_N << "\n";
  os << "  word_len = " << r.config.word_len << "\n";
  os << "  seed = " << r.config.seed << "\n";
  if (r.config.words.empty()) {
    os << "  words = (derived from hyperbolicity certificate)\n";
  } else {
    os << "  words =";
    for (const auto& w : r.config.words) os << " '" << w << "'";
    os << "\n";
  }
  if (r.used_certificate) {
    os << "certificate: " << (r.certificate.certified ? "verified" : "not verified")
       << " at length " << r.certificate.checked_length << ", rank " << r.certificate.achieved_rank
       << "\n";
  }

  os << "\nwords used (series per expanding subspace):\n";
  os << "  word              dim_E  N     value_tail    alpha_sup    decay\n";
  for (const auto& w : r.words) {
    std::ostringstream decay;
    if (w.dim_E > 0 && w.tail_k > 0)
      decay << "q=" << fmt(w.tail_q, 4) << " per " << w.tail_k << " steps";
    else if (w.dim_E == 0)
      decay << "(no expanding directions; skipped)";
    os << "  " << std::left << std::setw(18) << w.pretty << std::setw(7) << w.dim_E << std::setw(6)
       << w.N << std::setw(14) << fmt(w.value_tail, 4) << std::setw(13) << fmt(w.alpha_sup, 4)
       << decay.str() << "\n"
       << std::right;
  }

  const BudgetBreakdown& b = r.budget;
  os << "\nerror budget:\n";
  os << "  value_tail        = " << fmt(b.value_tail) << "\n";
  os << "  interp_phi2       = " << fmt(b.interp_phi2) << "\n";
  os << "  interp_delta      = " << fmt(b.interp_delta) << "\n";
  os << "  series_allowance  = " << fmt(b.series_allowance) << "\n";
  os << "  assembly_residual = " << fmt(b.assembly_residual) << " (allowance "
     << fmt(b.assembly_allowance()) << ")\n";
  os << "  amp_solve         = " << fmt(b.amp_solve) << "\n";
  os << "  amp_linear        = " << fmt(b.amp_linear) << "\n";
  os << "  core              = " << fmt(b.core()) << "\n";
  os << "  total budget      = " << fmt(b.total()) << "\n";
  os << "assembly consistent: " << (r.assembly_consistent ? "yes" : "NO") << "\n";

  os << "\nequivariance residuals:\n";
  os << "  generator     sup_residual   budget        pass\n";
  for (const auto& row : r.residuals)
    os << "  " << std::left << std::setw(14) << row.name << std::setw(15)
       << fmt(row.sup_residual, 4) << std::setw(14) << fmt(row.budget, 4)
       << (row.pass ? "yes" : "NO") << "\n"
       << std::right;

  os << "\nphi2 sup norm = " << fmt(r.phi2.sup_norm()) << "\n";
  os << "max residual  = " << fmt(r.max_residual) << "\n";
  os << "verdict: " << verdict_name(r.verdict) << "\n";
  return os.str();
}

std::string render_residuals_csv(const SemiconjugacyResult& r) {
  std::ostringstream os;
  os << "generator,sup_residual,budget,pass\n";
  for (const auto& row : r.residuals)
    os << row.name << "," << fmt(row.sup_residual, 12) << "," << fmt(row.budget, 12) << ","
       << (row.pass ? 1 : 0) << "\n";
  return os.str();
}

int run_solve(const ActionSource& src, const RunConfig& config, const std::string& out_dir) {
  const ActionSpec action = src.make();
  const SemiconjugacyResult result = solve_semiconjugacy(action, config);

  namespace fs = std::filesystem;
  const fs::path out(out_dir.empty() ? "." : out_dir);
  fs::create_directories(out);
  atomic_save_grid((out / "phi2.scgf").string(), result.phi2);
  atomic_write_text((out / "report.txt").string(), render_report(action, src, result));
  atomic_write_text((out / "residuals.csv").string(), render_residuals_csv(result));

  std::cout << render_report(action, src, result);
  std::cout << "\nwrote " << (out / "phi2.scgf").string() << "\n";
  std::cout << "wrote " << (out / "report.txt").string() << "\n";
  std::cout << "wrote " << (out / "residuals.csv").string() << "\n";

  switch (result.verdict) {
    case Verdict::certified: return kExitOk;
    case Verdict::not_certified: return kExitNotCertified;
    case Verdict::no_semiconjugacy: return kExitNoSemiconjugacy;
  }
  return kExitNumerical;
}

// --- verify -----------------------------------------------------------------

int run_verify(const ActionSource& src, const std::string& psi_path, int res, double tol) {
  const ActionSpec action = src.make();
  const GridFunction phi2 = GridFunction::load(psi_path);
  if (phi2.dim() != action.n || phi2.codim() != action.n)
    fail(errc::bad_argument, "psi grid dimensions do not match the action");

  std::cout << "action: " << describe_source(src) << " (n = " << action.n << ")\n";
  std::cout << "candidate: psi = id + phi2 from " << psi_path
            << " (sup |phi2| = " << fmt(phi2.sup_norm()) << ")\n";
  double worst = 0;
  std::cout << "equivariance residuals (tolerance " << fmt(tol) << "):\n";
  for (std::size_t g = 0; g < action.generators.size(); ++g) {
    const double r = equivariance_residual(action, phi2, static_cast<int>(g), res);
    worst = std::max(worst, r);
    std::cout << "  " << std::left << std::setw(14) << action.generators[g].name << std::right
              << fmt(r, 6) << (r <= tol ? "   ok" : "   ABOVE TOLERANCE") << "\n";
  }
  try {
    const IntMatrix h1 = induced_h1(phi2);
    std::cout << "induced action of psi on H_1: " << h1.to_string()
              << (h1 == IntMatrix::identity(action.n) ? " (identity)" : "") << "\n";
  } catch (const Error& e) {
    std::cout << "induced action of psi on H_1: not available (" << e.what() << ")\n";
  }
  std::cout << "max residual = " << fmt(worst) << " -> "
            << (worst <= tol ? "within tolerance" : "no semiconjugacy at this tolerance") << "\n";
  return worst <= tol ? kExitOk : kExitNoSemiconjugacy;
}

// --- demo -------------------------------------------------------------------

int run_demo(const std::string& kind, double eps, int res, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path out(out_dir.empty() ? "." : out_dir);
  fs::create_directories(out);
  const std::string action_path = (out / "action.txt").string();

  std::vector<std::string> written;
  if (kind == "conjugation") {
    const OracleAction oracle = make_conjugated_sanov(eps, res);
    save_action(oracle.action, action_path);
    atomic_save_grid((out / "phi2_true.scgf").string(), oracle.phi_true);
    written.push_back(action_path);
    for (const auto& g : oracle.action.generators)
      written.push_back((out / ("action_" + g.name + ".scgf")).string());
    written.push_back((out / "phi2_true.scgf").string());
    std::cout << "conjugation demo: both generators conjugated by h = id + eta, eps = " << eps
              << "\n";
    std::cout << "the solver should recover phi2 close to phi2_true.scgf\n";
  } else if (kind == "twist") {
    const ActionSpec action = make_sanov_twist(eps, res);
    save_action(action, action_path);
    written.push_back(action_path);
    for (const auto& g : action.generators)
      if (g.map.delta().node_count() > 1) written.push_back((out / ("action_" + g.name + ".scgf")).string());
    std::cout << "twist demo: generator b conjugated against a parabolic partner, eps = " << eps
              << "\n";
    std::cout << "the solve should end in NO_SEMICONJUGACY (exit code 3)\n";
  } else if (kind == "linear") {
    const ActionSpec action = make_sanov(0.0);
    save_action(action, action_path);
    written.push_back(action_path);
    std::cout << "linear demo: the unperturbed integer pair; phi2 should come out zero\n";
  } else {
    fail(errc::bad_argument, "unknown demo kind '" + kind + "'");
  }

  for (const auto& f : written) std::cout << "wrote " << f << "\n";
  std::cout << "next: semiconj solve --spec " << action_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiconj: certified semiconjugacies for perturbed lattice actions on tori"};
  app.require_subcommand(1);

  // spectral
  auto* spectral = app.add_subcommand("spectral", "spectrum and expanding/nonexpanding splitting");
  std::string matrix_text;
  std::string word_text;
  ActionSource spectral_src;
  spectral->add_option("-m,--matrix", matrix_text, "integer matrix, rows ;-separated: \"2,1;1,1\"");
  spectral_src.attach(spectral);
  spectral->add_option("-w,--word", word_text, "word over the action's generators, e.g. \"a b^-1\"");

  // certify
  auto* certify = app.add_subcommand("certify", "search for a weak hyperbolicity certificate");
  ActionSource certify_src;
  certify_src.attach(certify, /*with_res=*/false);
  int certify_len = kWordLen;
  certify->add_option("-L,--word-len", certify_len, "max reduced word length to search")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // solve
  auto* solve = app.add_subcommand("solve", "construct and certify the semiconjugacy psi = id + phi2");
  ActionSource solve_src;
  solve_src.attach(solve);
  RunConfig config;
  std::string out_dir;
  solve->add_option("--tol-tail", config.tol_tail, "certified series tail target")
      ->capture_default_str();
  solve->add_option("--max-n", config.max_N, "cap on series terms")->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve->add_option("--words", config.words,
                    "explicit solve words (repeatable), e.g. --words \"a b\" --words \"b a\"");
  solve->add_option("--word-len", config.word_len, "certificate search depth for the word set")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  solve->add_option("--seed", config.seed, "seed for randomized spot checks")->capture_default_str();
  solve->add_option("-o,--out", out_dir, "output directory for phi2.scgf, report.txt, residuals.csv")
      ->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "check a candidate psi = id + phi2 against the action");
  ActionSource verify_src;
  verify_src.attach(verify);
  std::string psi_path;
  double verify_tol = 1e-3;
  verify->add_option("--psi", psi_path, "phi2 grid file (SCGF)")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--tol", verify_tol, "residual tolerance")->capture_default_str();

  // demo
  auto* demo = app.add_subcommand("demo", "write a ready-made example action to disk");
  std::string demo_kind;
  double demo_eps = 0.05;
  int demo_res = 0;
  std::string demo_out = "demo_out";
  demo->add_option("kind", demo_kind, "conjugation | twist | linear")
      ->required()
      ->check(CLI::IsMember({"conjugation", "twist", "linear"}));
  demo->add_option("--eps", demo_eps, "perturbation amplitude")->capture_default_str();
  demo->add_option("--res", demo_res, "grid resolution per axis (0 = default)")
      ->check(CLI::NonNegativeNumber);
  demo->add_option("-o,--out", demo_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (spectral->parsed()) return run_spectral(matrix_text, spectral_src, word_text);
    if (certify->parsed()) {
      if (!certify_src.given())
        fail(errc::bad_argument, "certify needs --spec FILE or --preset NAME");
      return run_certify(certify_src, certify_len);
    }
    if (solve->parsed()) {
      if (!solve_src.given()) fail(errc::bad_argument, "solve needs --spec FILE or --preset NAME");
      config.res = solve_src.res;
      return run_solve(solve_src, config, out_dir);
    }
    if (verify->parsed()) {
      if (!verify_src.given())
        fail(errc::bad_argument, "verify needs --spec FILE or --preset NAME");
      return run_verify(verify_src, psi_path, verify_src.res, verify_tol);
    }
    if (demo->parsed()) return run_demo(demo_kind, demo_eps, demo_res, demo_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
