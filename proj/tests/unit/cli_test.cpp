#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end tests driving the installed binary through a shell.

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
    std::string stderr_text;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

RunResult run(const std::string& args) {
    static int counter = 0;
    std::string out_path = "cli_test_stdout_" + std::to_string(counter) + ".txt";
    std::string err_path = "cli_test_stderr_" + std::to_string(counter) + ".txt";
    ++counter;
    std::string command = std::string(PRIOSAMPLE_CLI_PATH) + " " + args + " >" + out_path +
                          " 2>" + err_path;
    int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.stdout_text = slurp(out_path);
    result.stderr_text = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return result;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("sample is deterministic: same seed, byte-identical files") {
    auto a = run("sample --synthetic unit:n=50 --scheme pri --k 5 --seed 11 --out cli_a.json");
    auto b = run("sample --synthetic unit:n=50 --scheme pri --k 5 --seed 11 --out cli_b.json");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(a.stdout_text.find("items_seen=50") != std::string::npos);
    CHECK(slurp("cli_a.json") == slurp("cli_b.json"));

    auto c = run("sample --synthetic unit:n=50 --scheme pri --k 5 --seed 12 --out cli_c.json");
    REQUIRE(c.exit_code == 0);
    CHECK(slurp("cli_a.json") != slurp("cli_c.json"));
}

TEST_CASE("the relaxed scheme produces the exact scheme's sample") {
    auto exact =
        run("sample --synthetic gateway:n=3000 --scheme pri --k 40 --seed 3 --out cli_e.json");
    auto relaxed = run(
        "sample --synthetic gateway:n=3000 --scheme pri-relaxed --k 40 --seed 3 --out cli_r.json");
    REQUIRE(exact.exit_code == 0);
    REQUIRE(relaxed.exit_code == 0);
    CHECK(slurp("cli_e.json") == slurp("cli_r.json"));
}

TEST_CASE("estimate answers a csv-backed query and round-trips") {
    write_file("cli_flows.csv",
               "id,weight,app\n"
               "0,40,ftp\n"
               "1,25,ftp\n"
               "2,5,web\n");
    auto sampled =
        run("sample --input cli_flows.csv --scheme pri --k 3 --seed 2 --out cli_s.json");
    REQUIRE(sampled.exit_code == 0);
    // n <= k: everything retained, estimates equal the weights exactly.
    auto est = run("estimate --sample cli_s.json --where app=ftp --csv");
    REQUIRE(est.exit_code == 0);
    CHECK(est.stdout_text.find("total,65,0") != std::string::npos);

    auto again = run("estimate --sample cli_s.json --where app=ftp --csv");
    CHECK(again.stdout_text == est.stdout_text);
}

TEST_CASE("unknown attribute keys warn but answer zero") {
    auto est = run("estimate --sample cli_s.json --where nonsense=1");
    REQUIRE(est.exit_code == 0);
    CHECK(est.stderr_text.find("not present in any sampled record") != std::string::npos);
    CHECK(est.stdout_text.find("\"estimate\": 0.0") != std::string::npos);
}

TEST_CASE("malformed csv rows fail with the line number") {
    write_file("cli_bad.csv",
               "id,weight\n"
               "0,1\n"
               "1,not-a-number\n");
    auto result = run("sample --input cli_bad.csv --scheme pri --k 2 --seed 1 --out cli_x.json");
    CHECK(result.exit_code == 2);
    CHECK(result.stderr_text.find("csv line 3") != std::string::npos);
}

TEST_CASE("nonpositive k is a usage error") {
    auto result = run("sample --synthetic unit:n=10 --scheme pri --k 0 --seed 1 --out cli_x.json");
    CHECK(result.exit_code == 2);
}

TEST_CASE("negative weights are rejected with the secondary-column hint") {
    write_file("cli_neg.csv",
               "id,weight\n"
               "0,-3\n");
    auto result = run("sample --input cli_neg.csv --scheme pri --k 2 --seed 1 --out cli_x.json");
    CHECK(result.exit_code == 2);
    CHECK(result.stderr_text.find("secondary") != std::string::npos);
}

TEST_CASE("verify exits zero on a passing suite") {
    auto result = run("verify --suite exactify --trials 60 --seed 4");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.find("checks passed") != std::string::npos);
    CHECK(result.stdout_text.find("FAIL") == std::string::npos);
}

TEST_CASE("verify rejects unknown suites") {
    auto result = run("verify --suite nonsense");
    CHECK(result.exit_code == 2);
}

TEST_CASE("failed checks exit with status 1") {
    // 2% tolerance bands cannot hold at a few thousand trials; the command
    // must report the failures and exit 1 (not 2: the invocation is valid).
    auto result = run("verify --suite closed-forms --trials 5000 --seed 3");
    CHECK(result.exit_code == 1);
    CHECK(result.stdout_text.find("FAIL") != std::string::npos);
}

TEST_CASE("compare writes the three csv reports") {
    auto result = run(
        "compare --synthetic gateway:n=800 --schemes pri,wwr --k-grid 10,30 "
        "--replicates 4 --seed 6 --out cli_cmp_");
    REQUIRE(result.exit_code == 0);
    std::string subsets = slurp("cli_cmp_subsets.csv");
    CHECK(subsets.find("scheme,k,replicate,subset,truth,estimate,rel_error") == 0);
    CHECK(subsets.find("app=ftp") != std::string::npos);
    std::string distinct = slurp("cli_cmp_distinct.csv");
    CHECK(distinct.find("scheme,k,replicate,distinct,pct_of_target") == 0);
    std::string matrix = slurp("cli_cmp_matrix.csv");
    CHECK(matrix.find("scheme,k,replicate,aggregate_error") == 0);
}

TEST_CASE("synthetic spec can come from a file") {
    write_file("cli_spec.txt", "# demo trace\nunit:n=50\n");
    auto from_file =
        run("sample --synthetic cli_spec.txt --scheme pri --k 5 --seed 11 --out cli_f.json");
    REQUIRE(from_file.exit_code == 0);
    CHECK(slurp("cli_f.json") == slurp("cli_a.json"));  // same as the inline unit:n=50 run

    write_file("cli_empty_spec.txt", "# nothing here\n");
    auto empty = run("sample --synthetic cli_empty_spec.txt --scheme pri --k 5 --seed 1 "
                     "--out cli_x.json");
    CHECK(empty.exit_code == 2);
}

TEST_CASE("threshold sample sizes vary across seeds around the target") {
    auto first =
        run("sample --synthetic gateway:n=2000 --scheme thr --k 25 --seed 31 --out cli_t1.json");
    auto second =
        run("sample --synthetic gateway:n=2000 --scheme thr --k 25 --seed 32 --out cli_t2.json");
    REQUIRE(first.exit_code == 0);
    REQUIRE(second.exit_code == 0);
    auto distinct_of = [](const std::string& text) {
        auto pos = text.find("distinct_samples=");
        return text.substr(pos, text.find(' ', pos) - pos);
    };
    CHECK(first.stdout_text.find("expected 25 samples") != std::string::npos);
    CHECK(distinct_of(first.stdout_text) != distinct_of(second.stdout_text));
}
