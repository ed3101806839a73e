#include <filesystem>

#include <gtest/gtest.h>

#include "contagion/io.hpp"

using namespace contagion;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "contagion_io_test";
  fs::create_directories(dir);
  return dir / name;
}

Certificate sample_certificate() {
  const auto p = exact_distribution<double>({InfluenceKind::Delayed, 0.5, 3});
  return find_witness(p, ModelClass::delta_causal(3, -0.25, 0.125), 2);
}

}  // namespace

TEST(CertificateJson, RoundTripIsLossless) {
  const auto cert = sample_certificate();
  const auto back = certificate_from_json(json::parse(as_json(cert).dump()));
  EXPECT_EQ(back.gamma, cert.gamma);
  EXPECT_EQ(back.c, cert.c);
  ASSERT_EQ(back.lambdas.size(), cert.lambdas.size());
  for (std::size_t k = 0; k < cert.lambdas.size(); ++k) {
    EXPECT_EQ(back.lambdas[k].exponents, cert.lambdas[k].exponents);
    EXPECT_EQ(back.lambdas[k].value, cert.lambdas[k].value);
  }
  EXPECT_EQ(back.T, cert.T);
  EXPECT_EQ(back.delta, cert.delta);
  EXPECT_EQ(back.varset, cert.varset);
  EXPECT_EQ(back.d_max, cert.d_max);
}

TEST(CertificateJson, MalformedInputsAreUsageErrors) {
  const json good = as_json(sample_certificate());
  auto missing = good;
  missing.erase("gamma");
  EXPECT_THROW(certificate_from_json(missing), UsageError);
  auto wrong_vars = good;
  wrong_vars["model"]["varset"] = {"a0", "ap"};
  EXPECT_THROW(certificate_from_json(wrong_vars), UsageError);
  auto short_c = good;
  short_c["c"] = std::vector<double>(10, 0.0);
  EXPECT_THROW(certificate_from_json(short_c), UsageError);
  auto bad_exp = good;
  bad_exp["lambdas"] = json::array({{{"exponents", {1, 2}}, {"value", 0.5}}});
  EXPECT_THROW(certificate_from_json(bad_exp), UsageError);
  auto wrong_type = good;
  wrong_type["gamma"] = "large";
  EXPECT_THROW(certificate_from_json(wrong_type), UsageError);
}

TEST(CountsCsv, RoundTrip) {
  const auto p = exact_distribution<double>({InfluenceKind::Instant, 0.4, 3});
  const auto emp = sample_counts(p, 3, 5000, 9);
  const auto back = counts_from_csv(counts_to_csv(emp));
  EXPECT_EQ(back.T, 3);
  EXPECT_EQ(back.counts, emp.counts);
}

TEST(CountsCsv, FileAndSidecarRoundTrip) {
  const auto path = scratch("counts.csv");
  auto emp = sample_counts(exact_distribution<double>({InfluenceKind::Delayed, 0.2, 4}), 4, 3000, 4);
  write_counts(path, emp, {{"note", "test"}});
  EXPECT_TRUE(fs::exists(sidecar_path(path)));
  const auto back = read_counts(path);
  EXPECT_EQ(back.counts, emp.counts);
  EXPECT_EQ(back.seed, 4u);
  EXPECT_EQ(back.generator, "multinomial");
  const auto data = load_data(path);
  EXPECT_EQ(data.T, 4);
  EXPECT_EQ(data.M(), 3000u);

  // A sidecar that disagrees with the CSV is rejected.
  write_json(sidecar_path(path), {{"T", 4}, {"M", 1}});
  EXPECT_THROW(read_counts(path), UsageError);
}

TEST(CountsCsv, MalformedRowsAreRejected) {
  EXPECT_THROW(counts_from_csv("a_bits,b_bits,count\n"), UsageError);
  EXPECT_THROW(counts_from_csv("01,10,3\n011,100,2\n"), UsageError);
  EXPECT_THROW(counts_from_csv("01,1,3\n"), UsageError);
  EXPECT_THROW(counts_from_csv("01,10,-3\n"), UsageError);
  EXPECT_THROW(counts_from_csv("01,10,3x\n"), UsageError);
  EXPECT_THROW(counts_from_csv("01,12,3\n"), UsageError);
  EXPECT_THROW(counts_from_csv("01;10;3\n"), UsageError);
  const auto emp = counts_from_csv("a_bits,b_bits,count\r\n01,10,3\r\n01,10,2\r\n");
  EXPECT_EQ(emp.M(), 5u);
}

TEST(Frequencies, JsonInputLoads) {
  const auto path = scratch("exact.json");
  const auto p = exact_distribution<double>({InfluenceKind::Delayed, 0.5, 4});
  write_frequencies(path, 4, p, "delayed");
  const auto data = load_data(path);
  EXPECT_EQ(data.T, 4);
  EXPECT_EQ(data.p, p);
  EXPECT_FALSE(data.counts.has_value());
  EXPECT_THROW(load_data(scratch("does_not_exist.csv")), UsageError);
}

TEST(ObservableJson, LengthAndValuesChecked) {
  EXPECT_EQ(observable_from_json(json(std::vector<double>(256, 0.0)), 4).values.size(), 256u);
  EXPECT_THROW(observable_from_json(json(std::vector<double>(255, 0.0)), 4), UsageError);
}
