#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

const std::string cli = FSEARCH_CLI_PATH;

int run(const std::string& args) {
  const int rc = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_fixture(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

const char* kLocationCsv =
    "y,x\n1,1\n2,1\n3,1\n4,1\n5,1\n15,1\n";

}  // namespace

TEST_CASE("analyze: location fixture") {
  write_fixture("/tmp/fs_loc.csv", kLocationCsv);
  CHECK(run("analyze /tmp/fs_loc.csv --output /tmp/fs_loc_out.csv") == 0);
  const std::string out = slurp("/tmp/fs_loc_out.csv");
  // header + 3 rows (m0 = n/2 = 3, steps m = 3,4,5)
  int lines = 0;
  for (char ch : out)
    if (ch == '\n') ++lines;
  CHECK(lines == 4);
  CHECK(out.rfind("m,psi,z,d,sigma,sigma_corr,beta0,band_mean,band_lower,band_upper\n",
                  0) == 0);

  // d <= z in every row
  std::stringstream ss(out);
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // m
    std::getline(row, cell, ',');  // psi
    std::getline(row, cell, ',');
    const double z = std::stod(cell);
    std::getline(row, cell, ',');
    const double d = std::stod(cell);
    CHECK(d <= z);
  }
}

TEST_CASE("analyze: byte identical across runs") {
  write_fixture("/tmp/fs_loc.csv", kLocationCsv);
  CHECK(run("analyze /tmp/fs_loc.csv --initial lms --seed 9 --output /tmp/fs_a.csv") == 0);
  CHECK(run("analyze /tmp/fs_loc.csv --initial lms --seed 9 --output /tmp/fs_b.csv") == 0);
  CHECK(slurp("/tmp/fs_a.csv") == slurp("/tmp/fs_b.csv"));
}

TEST_CASE("analyze: malformed input exits 2 with diagnostics") {
  write_fixture("/tmp/fs_bad.csv", "y,x\n1,1\nfoo,1\n3,1\n4,1\n");
  CHECK(run("analyze /tmp/fs_bad.csv") == 2);
  write_fixture("/tmp/fs_noy.csv", "a,b\n1,1\n2,1\n");
  CHECK(run("analyze /tmp/fs_noy.csv") == 2);
}

TEST_CASE("bands: psi grid touching 1 exits 4") {
  CHECK(run("bands --dist normal --n 128 --psi-min 0.5 --psi-max 1.0 --psi-points 3") == 4);
  CHECK(run("bands --dist weird") == 4);
}

TEST_CASE("bands: figure-style output") {
  CHECK(run("bands --dist normal --n 128 --level 0.90 --output /tmp/fs_bands.csv") == 0);
  const std::string out = slurp("/tmp/fs_bands.csv");
  CHECK(out.rfind("psi,mean,lower,upper\n", 0) == 0);
  int lines = 0;
  for (char ch : out)
    if (ch == '\n') ++lines;
  CHECK(lines == 182);  // header + 181 grid points
}

TEST_CASE("moments: tau and varsigma_sq columns at psi = 0.5") {
  CHECK(run("moments --dist normal --psi-min 0.5 --psi-max 0.5 --psi-points 1 "
            "--output /tmp/fs_mom.csv") == 0);
  std::stringstream ss(slurp("/tmp/fs_mom.csv"));
  std::string header, row, cell;
  std::getline(ss, header);
  CHECK(header == "psi,c,tau,kappa,varsigma_sq,rho");
  std::getline(ss, row);
  std::stringstream rs(row);
  std::vector<double> vals;
  while (std::getline(rs, cell, ',')) vals.push_back(std::stod(cell));
  REQUIRE(vals.size() == 6);
  // against independent constants: c_{0.5} = Phi^{-1}(0.75), tau = psi - 2 c phi(c)
  const double c = 0.6744897501960817;
  const double phi_c = std::exp(-0.5 * c * c) / std::sqrt(2.0 * M_PI);
  const double tau = 0.5 - 2.0 * c * phi_c;
  CHECK(vals[1] == doctest::Approx(c).epsilon(1e-10));
  CHECK(vals[2] == doctest::Approx(tau).epsilon(1e-10));
  CHECK(vals[4] == doctest::Approx(tau / 0.5).epsilon(1e-10));
}

TEST_CASE("simulate: single replicate JSON smoke and determinism") {
  CHECK(run("simulate --n 60 --reps 1 --seed 5 --output /tmp/fs_sim1.json") == 0);
  const std::string out = slurp("/tmp/fs_sim1.json");
  CHECK(out.find("\"records\"") != std::string::npos);
  CHECK(out.find("\"coverage\"") != std::string::npos);

  // byte-identical across runs and thread counts
  CHECK(std::system(("FS_THREADS=1 " + cli +
                     " simulate --n 80 --reps 20 --seed 12 --output /tmp/fs_s1.json")
                        .c_str()) == 0);
  CHECK(std::system(("FS_THREADS=8 " + cli +
                     " simulate --n 80 --reps 20 --seed 12 --output /tmp/fs_s8.json")
                        .c_str()) == 0);
  CHECK(slurp("/tmp/fs_s1.json") == slurp("/tmp/fs_s8.json"));
}

TEST_CASE("simulate: stable JSON schema (golden keys)") {
  CHECK(run("simulate --n 60 --reps 2 --seed 77 --output /tmp/fs_schema.json") == 0);
  const std::string out = slurp("/tmp/fs_schema.json");
  for (const char* key :
       {"\"config\"", "\"regime\"", "\"n\"", "\"seed\"", "\"failures\"",
        "\"records\"", "\"psi\"", "\"z_over_sigma\"", "\"z_over_sigma_corr\"",
        "\"sigma_corr\"", "\"beta\"", "\"mean\"", "\"variance\"", "\"quantiles\"",
        "\"coverage\""})
    CHECK(out.find(key) != std::string::npos);
}
