#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "test_helpers.hpp"

#ifndef CCAGRADE_CLI_PATH
#error "CCAGRADE_CLI_PATH must point at the ccagrade binary"
#endif

TEST_SUITE_BEGIN("cli");

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

// The CLI is a process boundary, so these tests go through the shell on
// purpose: exit codes and byte-exact output are part of the contract.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path capture =
      fs::temp_directory_path() / ("ccagrade_cli_out_" + std::to_string(counter++) + ".txt");
  const std::string command =
      std::string("\"") + CCAGRADE_CLI_PATH + "\" " + args + " > \"" + capture.string() +
      "\" 2>&1";
  const int status = std::system(command.c_str());

  RunResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  std::ifstream in(capture);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  fs::remove(capture);
  return result;
}

struct TempFile {
  fs::path path;

  explicit TempFile(const std::string& contents, const std::string& suffix = ".csv") {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ccagrade_cli_tmp_" + std::to_string(counter++) + suffix);
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { fs::remove(path); }
};

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("help exits zero") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("eval --help").exit_code == 0);
}

TEST_CASE("missing input files exit with the usage code") {
  const RunResult gone =
      run_cli("eval --embeddings /nonexistent/vectors.txt --dataset /nonexistent/data.csv");
  CHECK(gone.exit_code == 1);
  CHECK(gone.output.find("error") != std::string::npos);

  CHECK(run_cli("grade").exit_code == 1);  // required options absent
  CHECK(run_cli("definitely-not-a-subcommand").exit_code == 1);
}

TEST_CASE("grade writes one row per pair and flags identical answers") {
  const TempFile pairs(
      "id,desired_answer,student_answer\n"
      "1.1,\"At the main function.\",\"At the main function.\"\n"
      "1.2,\"At the main function.\",\"The main method.\"\n"
      "1.3,\"At the main function.\",\"\"\n");
  const fs::path out = fs::temp_directory_path() / "ccagrade_cli_grades.csv";

  const RunResult run = run_cli("grade --embeddings " +
                                quoted(testutil::data_path("mini_embeddings.txt")) +
                                " --pairs " + quoted(pairs.path.string()) + " --out " +
                                quoted(out.string()));
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("n_pairs=3") != std::string::npos);

  const std::string written = read_file(out);
  CHECK(written.find("id,grade,mean_cosine,dim_used,flags") != std::string::npos);
  CHECK(written.find("1.1,5.000000000") != std::string::npos);
  CHECK(written.find("empty_answer") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("eval reports the fixture correlation and flags") {
  const RunResult run = run_cli("eval --embeddings " +
                                quoted(testutil::data_path("mini_embeddings.txt")) +
                                " --dataset " + quoted(testutil::data_path("eval_fixture.csv")) +
                                " --per-question");
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("n_pairs=10") != std::string::npos);
  CHECK(run.output.find("pearson_r=0.851448630") != std::string::npos);
  CHECK(run.output.find("flag_counts.empty_answer=2") != std::string::npos);
  CHECK(run.output.find("per_question_r.1.1=") != std::string::npos);
}

TEST_CASE("eval output is byte-identical across runs and thread counts") {
  const std::string base = "eval --embeddings " +
                           quoted(testutil::data_path("mini_embeddings.txt")) + " --dataset " +
                           quoted(testutil::data_path("eval_fixture.csv")) + " --per-question";
  const RunResult first = run_cli(base + " --threads 1");
  const RunResult second = run_cli(base + " --threads 1");
  const RunResult wide = run_cli(base + " --threads 8");
  CHECK(first.exit_code == 0);
  CHECK(first.output == second.output);
  CHECK(first.output == wide.output);
}

TEST_CASE("eval can dump the aligned grades") {
  const fs::path dump = fs::temp_directory_path() / "ccagrade_cli_dump.csv";
  const RunResult run = run_cli("eval --embeddings " +
                                quoted(testutil::data_path("mini_embeddings.txt")) +
                                " --dataset " + quoted(testutil::data_path("eval_fixture.csv")) +
                                " --dump-grades " + quoted(dump.string()));
  CHECK(run.exit_code == 0);
  const std::string written = read_file(dump);
  CHECK(written.find("id,grade,score_avg") != std::string::npos);
  CHECK(written.find("1.1,") != std::string::npos);
  fs::remove(dump);
}

TEST_CASE("cca fit writes a loadable model") {
  const TempFile x("1.0,0.5\n2.0,0.1\n1.5,-0.3\n0.2,0.9\n3.1,0.4\n2.2,-0.8\n");
  const TempFile y("0.9,1.1\n2.1,0.2\n1.4,0.1\n0.1,1.2\n3.0,0.3\n2.4,-0.5\n");
  const fs::path out = fs::temp_directory_path() / "ccagrade_cli_model.json";

  const RunResult run = run_cli("cca fit --x " + quoted(x.path.string()) + " --y " +
                                quoted(y.path.string()) + " --out " + quoted(out.string()));
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("dim=2") != std::string::npos);
  CHECK(run.output.find("rho.0=") != std::string::npos);

  const std::string written = read_file(out);
  CHECK(written.find("\"u_a\"") != std::string::npos);
  CHECK(written.find("\"dim\"") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("the self-checks pass and exit zero") {
  const RunResult lemma2 = run_cli("check lemma2 --seed 3");
  CHECK(lemma2.exit_code == 0);
  CHECK(lemma2.output.find("ok=1") != std::string::npos);

  const RunResult pcca = run_cli("check pcca --seed 3 --trials 5");
  CHECK(pcca.exit_code == 0);
  CHECK(pcca.output.find("nll_violations=0") != std::string::npos);
}

TEST_SUITE_END();
