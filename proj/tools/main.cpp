#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"

#include "ccagrade/cca.hpp"
#include "ccagrade/dataset.hpp"
#include "ccagrade/errors.hpp"
#include "ccagrade/grader.hpp"
#include "ccagrade/json_io.hpp"
#include "ccagrade/multiview.hpp"
#include "ccagrade/pcca.hpp"
#include "ccagrade/rng.hpp"
#include "ccagrade/text.hpp"

namespace {

using namespace ccagrade;

constexpr const char* kDimPlaceholder = "{dim}";

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string flags_to_string(const GradeFlags& f) {
  std::string out;
  auto append = [&](const char* name) {
    if (!out.empty()) out += ';';
    out += name;
  };
  if (f.empty_answer) append("empty_answer");
  if (f.rank_truncated) append("rank_truncated");
  if (f.oov_dropped) append("oov_dropped");
  return out;
}

CosineMode parse_cosine(const std::string& name) {
  if (name == "centered") return CosineMode::centered;
  if (name == "uncentered") return CosineMode::uncentered;
  throw InvalidInput("unknown cosine mode: " + name);
}

std::string substitute_dim(const std::string& pattern, Eigen::Index dim) {
  std::string out = pattern;
  const std::size_t pos = out.find(kDimPlaceholder);
  if (pos == std::string::npos) return out;
  out.replace(pos, std::string(kDimPlaceholder).size(), std::to_string(dim));
  return out;
}

void add_tokens(std::unordered_set<std::string>& vocab, const std::string& text,
                const PreprocessConfig& config) {
  for (std::string& token : preprocess(text, config)) vocab.insert(std::move(token));
}

struct GradeArgs {
  std::string embeddings;
  std::string pairs;
  std::string out;
  std::optional<Eigen::Index> dim;
  std::optional<double> ridge;
  std::string cosine = "uncentered";
};

void run_grade(const GradeArgs& args) {
  const std::vector<PairRecord> pairs = load_pairs(args.pairs);
  GraderConfig config;
  config.cosine = parse_cosine(args.cosine);
  if (args.ridge) config.cca.ridge = *args.ridge;

  std::unordered_set<std::string> vocab;
  for (const PairRecord& p : pairs) {
    add_tokens(vocab, p.desired_answer, config.preprocess);
    add_tokens(vocab, p.student_answer, config.preprocess);
  }
  const EmbeddingTable table = load_embeddings(args.embeddings, args.dim, &vocab);

  std::vector<std::vector<std::string>> rows;
  rows.reserve(pairs.size() + 1);
  rows.push_back({"id", "grade", "mean_cosine", "dim_used", "flags"});
  for (const PairRecord& p : pairs) {
    const GradeResult res = grade_pair(p.desired_answer, p.student_answer, table, config);
    rows.push_back({p.id, format_real(res.grade), format_real(res.mean_cosine),
                    std::to_string(res.dim_used), flags_to_string(res.flags)});
  }
  write_csv(args.out, rows);
  std::cout << "n_pairs=" << pairs.size() << "\n";
  std::cout << "out=" << args.out << "\n";
}

struct EvalArgs {
  std::string embeddings;
  std::string dataset;
  bool per_question = false;
  std::vector<Eigen::Index> sweep_dims;
  std::optional<Eigen::Index> dim;
  std::optional<double> ridge;
  std::string cosine = "uncentered";
  unsigned threads = 0;
  std::string dump_grades;
};

EvalReport eval_once(const std::vector<AnswerRecord>& records,
                     const std::unordered_set<std::string>& vocab, const std::string& path,
                     std::optional<Eigen::Index> dim, const EvalArgs& args, std::ostream& out) {
  const EmbeddingTable table = load_embeddings(path, dim, &vocab);
  EvalOptions options;
  options.grader.cosine = parse_cosine(args.cosine);
  if (args.ridge) options.grader.cca.ridge = *args.ridge;
  options.per_question = args.per_question;
  options.n_threads = args.threads;
  const EvalReport report = evaluate(records, table, options);
  out << "dim=" << table.dim << "\n" << report.format();
  return report;
}

void run_eval(const EvalArgs& args) {
  const std::vector<AnswerRecord> records = load_dataset(args.dataset);
  PreprocessConfig preprocess_config;  // vocabulary only depends on preprocessing defaults
  std::unordered_set<std::string> vocab;
  for (const AnswerRecord& r : records) {
    add_tokens(vocab, r.desired_answer, preprocess_config);
    add_tokens(vocab, r.student_answer, preprocess_config);
  }

  if (!args.sweep_dims.empty()) {
    if (!args.dump_grades.empty())
      throw InvalidInput("--dump-grades cannot be combined with --sweep-dims");
    if (args.embeddings.find(kDimPlaceholder) == std::string::npos)
      throw InvalidInput(std::string("--sweep-dims needs an --embeddings path containing ") +
                         kDimPlaceholder);
    Eigen::Index best_dim = -1;
    double best_r = -2.0;
    for (const Eigen::Index d : args.sweep_dims) {
      if (d < 1) throw InvalidInput("sweep dimensions must be positive");
      const EvalReport report =
          eval_once(records, vocab, substitute_dim(args.embeddings, d), d, args, std::cout);
      if (report.pearson_r > best_r) {
        best_r = report.pearson_r;
        best_dim = d;
      }
    }
    std::cout << "best_dim=" << best_dim << "\n";
    std::cout << "best_pearson_r=" << format_real(best_r) << "\n";
    return;
  }

  std::string path = args.embeddings;
  if (path.find(kDimPlaceholder) != std::string::npos) {
    if (!args.dim) throw InvalidInput("an --embeddings path with {dim} requires --dim");
    path = substitute_dim(path, *args.dim);
  }
  const EvalReport report = eval_once(records, vocab, path, args.dim, args, std::cout);

  if (!args.dump_grades.empty()) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size() + 1);
    rows.push_back({"id", "grade", "score_avg"});
    for (std::size_t i = 0; i < records.size(); ++i)
      rows.push_back({records[i].record_id, format_real(report.grades[i]),
                      format_real(records[i].grade_avg)});
    write_csv(args.dump_grades, rows);
  }
}

struct CcaFitArgs {
  std::string x_path;
  std::string y_path;
  std::optional<Eigen::Index> components;
  std::string out;
};

void run_cca_fit(const CcaFitArgs& args) {
  const DataMatrix x = load_numeric_csv(args.x_path);
  const DataMatrix y = load_numeric_csv(args.y_path);
  CcaConfig config;
  config.n_components = args.components;
  const CcaModel model = fit_cca(x, y, config);
  std::cout << "dim=" << model.dim << "\n";
  for (Eigen::Index i = 0; i < model.rho.size(); ++i)
    std::cout << "rho." << i << "=" << format_real(model.rho(i)) << "\n";
  if (!args.out.empty()) {
    save_cca_model(model, args.out);
    std::cout << "out=" << args.out << "\n";
  }
}

struct Lemma2Args {
  Eigen::Index latent_dim = 2;
  Eigen::Index m = 5;
  Eigen::Index n = 4;
  Eigen::Index samples = 2000;
  std::int64_t seed = 0;
};

void run_check_lemma2(const Lemma2Args& args) {
  NormalSampler rng(static_cast<std::uint64_t>(args.seed));
  const TwoViewSpec spec = random_two_view_spec(args.latent_dim, args.m, args.n, rng);

  const double population_dev = lemma2_check_population(spec);
  std::cout << "population_max_dev=" << format_sci(population_dev) << "\n";

  bool negative_ok = true;
  if (args.latent_dim >= 2) {
    const double control = lemma2_check_population(spec, args.latent_dim - 1);
    std::cout << "negative_control_dev=" << format_sci(control) << "\n";
    negative_ok = control > 1e-3;
  }

  const double gap =
      lemma2_check_empirical(spec, args.samples, static_cast<std::uint64_t>(args.seed));
  std::cout << "empirical_gap=" << format_sci(gap) << "\n";

  const bool ok = population_dev <= 1e-8 && negative_ok;
  std::cout << "ok=" << (ok ? 1 : 0) << "\n";
  if (!ok) throw NumericalFailure("lemma2 check failed");
}

struct PccaArgs {
  std::int64_t seed = 0;
  int trials = 10;
};

void run_check_pcca(const PccaArgs& args) {
  if (args.trials < 1) throw InvalidInput("--trials must be >= 1");
  NormalSampler rng(static_cast<std::uint64_t>(args.seed));
  double recon_max = 0.0;
  double margin_min = std::numeric_limits<double>::infinity();
  int violations = 0;

  for (int t = 0; t < args.trials; ++t) {
    const Eigen::Index latent = 1 + static_cast<Eigen::Index>(rng.engine()() % 2);
    const Eigen::Index m = latent + 1 + static_cast<Eigen::Index>(rng.engine()() % 3);
    const Eigen::Index n = latent + 1 + static_cast<Eigen::Index>(rng.engine()() % 3);
    const TwoViewSpec spec = random_two_view_spec(latent, m, n, rng);
    const TwoViewSample sample =
        generate_two_view(spec, 400, static_cast<std::uint64_t>(args.seed) * 1000003u + t);

    const Eigen::Index full_dim = std::min(m, n);
    const PccaParams params = estimate_pcca(sample.a1, sample.a2, full_dim);
    const Eigen::MatrixXd target = ml_stacked_covariance(sample.a1, sample.a2);
    recon_max = std::max(recon_max,
                         (model_covariance(params) - target).cwiseAbs().maxCoeff());

    const double base = negative_log_likelihood(params, sample.a1, sample.a2);
    for (int p = 0; p < 20; ++p) {
      PccaParams perturbed = params;
      const double scale = 0.05 * std::max(1.0, params.w_a.cwiseAbs().maxCoeff());
      for (Eigen::Index r = 0; r < perturbed.w_a.rows(); ++r)
        for (Eigen::Index c = 0; c < perturbed.w_a.cols(); ++c) perturbed.w_a(r, c) += scale * rng();
      for (Eigen::Index r = 0; r < perturbed.w_b.rows(); ++r)
        for (Eigen::Index c = 0; c < perturbed.w_b.cols(); ++c) perturbed.w_b(r, c) += scale * rng();
      double other = 0.0;
      try {
        other = negative_log_likelihood(perturbed, sample.a1, sample.a2);
      } catch (const SingularModelCovariance&) {
        continue;  // perturbation left the feasible set; draw the next one
      }
      const double margin = other - base;
      margin_min = std::min(margin_min, margin);
      if (margin < -1e-9 * std::abs(base)) ++violations;
    }
  }

  std::cout << "trials=" << args.trials << "\n";
  std::cout << "reconstruction_max_dev=" << format_sci(recon_max) << "\n";
  std::cout << "nll_margin_min=" << format_sci(margin_min) << "\n";
  std::cout << "nll_violations=" << violations << "\n";
  const bool ok = recon_max <= 1e-8 && violations == 0;
  std::cout << "ok=" << (ok ? 1 : 0) << "\n";
  if (!ok) throw NumericalFailure("pcca check failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CCA-based short answer grading toolkit"};
  app.require_subcommand(1);

  GradeArgs grade_args;
  CLI::App* grade = app.add_subcommand("grade", "Grade answer pairs from a CSV");
  grade->add_option("--embeddings", grade_args.embeddings, "word embedding text file")->required();
  grade->add_option("--pairs", grade_args.pairs, "CSV with id,desired_answer,student_answer")
      ->required();
  grade->add_option("--out", grade_args.out, "output CSV path")->required();
  grade->add_option("--dim", grade_args.dim, "expected embedding dimension");
  grade->add_option("--ridge", grade_args.ridge, "covariance ridge (default: scale-aware)");
  grade->add_option("--cosine", grade_args.cosine, "centered|uncentered (default uncentered)")
      ->check(CLI::IsMember({"centered", "uncentered"}));
  grade->callback([&] { run_grade(grade_args); });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate grading against teacher scores");
  eval->add_option("--embeddings", eval_args.embeddings,
                   "embedding file; may contain {dim} for sweeps")
      ->required();
  eval->add_option("--dataset", eval_args.dataset, "dataset CSV")->required();
  eval->add_flag("--per-question", eval_args.per_question, "report per-question correlations");
  eval->add_option("--sweep-dims", eval_args.sweep_dims, "comma-separated dimensions to sweep")
      ->delimiter(',');
  eval->add_option("--dim", eval_args.dim, "expected embedding dimension");
  eval->add_option("--ridge", eval_args.ridge, "covariance ridge (default: scale-aware)");
  eval->add_option("--cosine", eval_args.cosine, "centered|uncentered (default uncentered)")
      ->check(CLI::IsMember({"centered", "uncentered"}));
  eval->add_option("--threads", eval_args.threads, "worker threads (0 = hardware)");
  eval->add_option("--dump-grades", eval_args.dump_grades, "write id,grade,score_avg CSV");
  eval->callback([&] { run_eval(eval_args); });

  CLI::App* cca = app.add_subcommand("cca", "Canonical correlation analysis utilities");
  cca->require_subcommand(1);
  CcaFitArgs fit_args;
  CLI::App* fit = cca->add_subcommand("fit", "Fit CCA on two numeric CSVs");
  fit->add_option("--x", fit_args.x_path, "first view CSV (rows = samples)")->required();
  fit->add_option("--y", fit_args.y_path, "second view CSV (rows = samples)")->required();
  fit->add_option("--components", fit_args.components, "number of canonical pairs");
  fit->add_option("--out", fit_args.out, "write the model as JSON");
  fit->callback([&] { run_cca_fit(fit_args); });

  CLI::App* check = app.add_subcommand("check", "Self-checks of the model-theoretic claims");
  check->require_subcommand(1);
  Lemma2Args lemma2_args;
  CLI::App* lemma2 = check->add_subcommand("lemma2", "Projection-preserves-prediction checks");
  lemma2->add_option("--latent-dim", lemma2_args.latent_dim, "latent dimension (default 2)");
  lemma2->add_option("--m", lemma2_args.m, "view 1 variables (default 5)");
  lemma2->add_option("--n", lemma2_args.n, "view 2 variables (default 4)");
  lemma2->add_option("--samples", lemma2_args.samples, "empirical sample count (default 2000)");
  lemma2->add_option("--seed", lemma2_args.seed, "RNG seed (default 0)");
  lemma2->callback([&] { run_check_lemma2(lemma2_args); });

  PccaArgs pcca_args;
  CLI::App* pcca = check->add_subcommand("pcca", "Probabilistic CCA estimate checks");
  pcca->add_option("--seed", pcca_args.seed, "RNG seed (default 0)");
  pcca->add_option("--trials", pcca_args.trials, "number of random instances (default 10)");
  pcca->callback([&] { run_check_pcca(pcca_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
