#include <gtest/gtest.h>

#include <sstream>

#include "unseen/io.hpp"

using namespace unseen;

TEST(SamplesTsv, ReadsLabelsAndInfersM) {
  std::istringstream in("# comment\n0\tA\n0\tB\n\n1\tA\n1\tA\r\n");
  io::LabelTable labels;
  const auto s = io::read_samples_tsv(in, labels);
  EXPECT_EQ(s.m(), 2u);
  EXPECT_EQ(s.sizes(), (Sizes{2, 2}));
  EXPECT_EQ(labels.size(), 2u);
  EXPECT_EQ(s.counts().at(labels.intern("A")), (IndexVector{1, 2}));
}

TEST(SamplesTsv, ExplicitMKeepsEmptyPopulations) {
  std::istringstream in("0\tx\n");
  io::LabelTable labels;
  EXPECT_EQ(io::read_samples_tsv(in, labels, 3).sizes(), (Sizes{1, 0, 0}));
}

TEST(SamplesTsv, MalformedLinesThrow) {
  io::LabelTable labels;
  for (const char* bad : {"0 A\n", "-1\tA\n", "x\tA\n", "0\t\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(io::read_samples_tsv(in, labels), FormatError) << bad;
  }
  std::istringstream in("2\tA\n");
  EXPECT_THROW(io::read_samples_tsv(in, labels, 2), FormatError);
}

TEST(SamplesTsv, RoundTrip) {
  std::istringstream in("0\tA\n1\tB\n1\tB\n0\tC\n");
  io::LabelTable labels;
  const auto s = io::read_samples_tsv(in, labels);
  std::ostringstream out;
  io::write_samples_tsv(out, s, &labels);
  std::istringstream again(out.str());
  io::LabelTable labels2;
  const auto s2 = io::read_samples_tsv(again, labels2);
  EXPECT_EQ(build_fingerprint(s), build_fingerprint(s2));
}

TEST(FingerprintTsv, RoundTrip) {
  Fingerprint fp(2, {5, 7});
  fp.add({0, 1}, 1);
  fp.add({1, 0}, 1);
  fp.add({1, 1}, 2);
  fp.add({1, 2}, 2);
  std::ostringstream out;
  io::write_fingerprint_tsv(out, fp);
  EXPECT_EQ(out.str(), "# m=2 n=5,7\n0\t1\t1\n1\t0\t1\n1\t1\t2\n1\t2\t2\n");
  std::istringstream in(out.str());
  EXPECT_EQ(io::read_fingerprint_tsv(in), fp);
}

TEST(FingerprintTsv, MalformedInputThrows) {
  for (const char* bad : {"", "1\t2\n", "# m=2 n=5\n", "# m=1 n=3\n1\t2\t3\n", "# m=1 n=3\n0\t4\n",
                          "# m=1 n=3\n4\t1\n", "# m=1 n=3\nx\t1\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(io::read_fingerprint_tsv(in), FormatError) << bad;
  }
}

TEST(HistogramJson, RoundTripIsExact) {
  Histogram h(2);
  h.add({0.1, 0.0}, 2.5);
  h.add({1.0 / 3, 0.7}, 1.0);
  std::stringstream buf;
  io::write_histogram_json(buf, h);
  const auto back = io::read_histogram_json(buf);
  ASSERT_EQ(back.size(), h.size());
  for (auto a = h.entries().begin(), b = back.entries().begin(); a != h.entries().end(); ++a, ++b) {
    EXPECT_EQ(a->second.alpha, b->second.alpha);
    EXPECT_EQ(a->second.mass, b->second.mass);
  }
}

TEST(HistogramJson, MalformedInputThrows) {
  for (const char* bad : {"{", "{\"m\": 1}", "{\"m\": 1, \"entries\": [{\"alpha\": [2.0], \"mass\": 1}]}",
                          "{\"m\": 2, \"entries\": [{\"alpha\": [0.5], \"mass\": 1}]}"}) {
    std::istringstream in(bad);
    EXPECT_THROW(io::read_histogram_json(in), FormatError) << bad;
  }
}

TEST(ListParsing, RealsAndSizes) {
  EXPECT_EQ(io::parse_real_list("1, 2.5,3"), (std::vector<double>{1, 2.5, 3}));
  EXPECT_EQ(io::parse_size_list("4,5"), (Sizes{4, 5}));
  EXPECT_THROW(io::parse_real_list("1,x"), FormatError);
  EXPECT_THROW(io::parse_size_list("-3"), FormatError);
  EXPECT_THROW(io::parse_size_list("2.5"), FormatError);
}
