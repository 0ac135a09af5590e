#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace bictk;
using namespace testing_support;

// ---------------------------------------------------------------------------
// Matrix I/O

TEST(MatrixIo, ParsesWellFormedTsv) {
  const auto m = parse_matrix("gene\ta\tb\ng1\t1\t2\ng2\t3\t4\ng3\t5\t6\n");
  EXPECT_EQ(m.rows(), 3u);
  EXPECT_EQ(m.cols(), 2u);
  EXPECT_EQ(m.missing_count(), 0u);
  EXPECT_EQ(m.row_ids()[2], "g3");
  EXPECT_EQ(m.col_ids()[1], "b");
  EXPECT_EQ(m(1, 1), 4.0);
}

TEST(MatrixIo, MissingMarkerSetsExactlyThatCell) {
  const auto m = parse_matrix("id\tx\ty\nr1\t1\tNA\nr2\t2\t3\n");
  EXPECT_EQ(m.missing_count(), 1u);
  EXPECT_TRUE(m.missing()(0, 1));
  EXPECT_FALSE(m.missing()(0, 0));
  EXPECT_FALSE(m.missing()(1, 1));
  EXPECT_TRUE(std::isnan(m(0, 1)));
}

TEST(MatrixIo, RaggedRowNamesTheLine) {
  try {
    parse_matrix("id\tx\ty\nr1\t1\t2\nr2\t3\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(MatrixIo, CommaDelimitedAndBadCells) {
  const auto m = parse_matrix("id,x\nr1,2.5\n", csv_options());
  EXPECT_EQ(m(0, 0), 2.5);
  EXPECT_THROW(parse_matrix("id\tx\nr1\tabc\n"), ParseError);
  EXPECT_THROW(parse_matrix(""), ValidationError);
  EXPECT_THROW(parse_matrix("id\tx\tx\nr1\t1\t2\n"), ValidationError);
}

TEST(MatrixIo, WriteParseRoundTripIsExact) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = 1 + rng.index(12), k = 1 + rng.index(9);
    Matrix x = random_matrix(n, k, rng, -1e3, 1e3);
    MissingMask mask = MissingMask::Constant(x.rows(), x.cols(), false);
    for (Eigen::Index c = 0; c < x.size(); ++c) mask(c) = rng.bernoulli(0.1);
    std::vector<std::string> r(n), c(k);
    for (std::size_t i = 0; i < n; ++i) r[i] = "gene_" + std::to_string(i);
    for (std::size_t j = 0; j < k; ++j) c[j] = "cond " + std::to_string(j);
    const ExpressionMatrix m(r, c, x, mask);
    EXPECT_EQ(parse_matrix(matrix_to_string(m)), m);
    EXPECT_EQ(parse_matrix(matrix_to_string(m, ','), csv_options()), m);
  }
}

TEST(Submatrix, Examples) {
  const auto m = from_rows({{1, 2}, {3, 5}});
  EXPECT_EQ(extract_submatrix(m, full_bicluster(2, 2)), m.values());
  const Matrix one = extract_submatrix(m, make_bicluster({0}, {1}));
  ASSERT_EQ(one.size(), 1);
  EXPECT_EQ(one(0, 0), 2.0);
  const Matrix col = extract_submatrix(m, make_bicluster({0, 1}, {0}));
  ASSERT_EQ(col.rows(), 2);
  ASSERT_EQ(col.cols(), 1);
  EXPECT_EQ(col(0, 0), 1.0);
  EXPECT_EQ(col(1, 0), 3.0);
  EXPECT_THROW(extract_submatrix(m, make_bicluster({2}, {0})), ValidationError);
  EXPECT_THROW(extract_submatrix(m, make_bicluster({}, {0})), ValidationError);
}

TEST(BiclusterSetIo, EmptySetRoundTrips) {
  const auto m = from_rows({{1, 2}, {3, 4}});
  BiclusterSet s;
  s.algorithm = "cc";
  s.seed = 5;
  const std::string text = dump_bicluster_set(s, m);
  EXPECT_EQ(Json::parse(text)["count"], 0);
  EXPECT_EQ(parse_bicluster_set(text, m), s);
}

TEST(BiclusterSetIo, TwoBiclustersRoundTrip) {
  const auto m = from_rows({{1, 2, 3}, {3, 4, 5}, {6, 7, 8}});
  BiclusterSet s;
  s.algorithm = "isa";
  s.params = {{"t_g", 2.0}};
  s.seed = 11;
  s.biclusters = {make_bicluster({0, 2}, {1, 2}), make_bicluster({1}, {0}, 0.25)};
  const auto back = parse_bicluster_set(dump_bicluster_set(s, m), m);
  EXPECT_EQ(back, s);
  EXPECT_EQ(dump_bicluster_set(back, m), dump_bicluster_set(s, m));
}

TEST(BiclusterSetIo, LabelsOutsideTheMatrixAreRejected) {
  const auto big = from_rows({{1, 2, 3}, {3, 4, 5}, {6, 7, 8}});
  const auto small = from_rows({{1, 2}, {3, 4}});
  BiclusterSet s;
  s.algorithm = "cc";
  s.biclusters = {make_bicluster({2}, {0})};
  EXPECT_THROW(parse_bicluster_set(dump_bicluster_set(s, big), small), ValidationError);
  EXPECT_THROW(parse_bicluster_set("{\"format\":\"other\"}", small), ParseError);
  EXPECT_THROW(parse_bicluster_set("not json", small), ParseError);
}

TEST(RunDescriptor, OnlyForwardTransitions) {
  RunDescriptor d;
  EXPECT_THROW(d.advance(RunStatus::done), ValidationError);
  d.advance(RunStatus::running);
  EXPECT_FALSE(d.started_at.empty());
  d.advance(RunStatus::failed);
  EXPECT_THROW(d.advance(RunStatus::running), ValidationError);
  const auto back = run_descriptor_from_json(to_json(d));
  EXPECT_EQ(back.status, RunStatus::failed);
}

// ---------------------------------------------------------------------------
// Preprocessing

TEST(Filter, NoMissingIsIdentity) {
  const auto m = from_rows({{1, 2}, {3, 4}});
  EXPECT_EQ(preprocess::filter_missing(m, 0.5, preprocess::Impute::row_mean), m);
}

TEST(Filter, DropsFullyMissingRow) {
  Matrix x = Matrix::Constant(4, 4, 1.0);
  MissingMask mask = MissingMask::Constant(4, 4, false);
  mask.row(2).setConstant(true);
  const ExpressionMatrix m({"a", "b", "c", "d"}, {"w", "x", "y", "z"}, x, mask);
  const auto out = preprocess::filter_missing(m, 0.5, preprocess::Impute::row_mean);
  EXPECT_EQ(out.rows(), 3u);
  EXPECT_EQ(out.cols(), 4u);
  EXPECT_EQ(out.row_ids(), (std::vector<std::string>{"a", "b", "d"}));
}

TEST(Filter, RowMeanImputation) {
  Matrix x(3, 3);
  x << 1, 2, 9, 4, 5, 6, 7, 8, 9;
  MissingMask mask = MissingMask::Constant(3, 3, false);
  mask(0, 2) = true;
  const ExpressionMatrix m({"a", "b", "c"}, {"x", "y", "z"}, x, mask);
  const auto out = preprocess::filter_missing(m, 0.5, preprocess::Impute::row_mean);
  EXPECT_EQ(out(0, 2), 1.5);
  EXPECT_TRUE(out.complete());
  const auto by_col = preprocess::filter_missing(m, 0.5, preprocess::Impute::col_mean);
  EXPECT_EQ(by_col(0, 2), 7.5);
  EXPECT_THROW(preprocess::filter_missing(m, 0.5, preprocess::Impute::none), IncompleteDataError);
}

TEST(Binarize, MedianThreshold) {
  const auto out =
      preprocess::binarize(from_rows({{1, 2}, {3, 5}}), preprocess::Threshold::parse("median"));
  EXPECT_EQ(out.matrix.values(), from_rows({{0, 0}, {1, 1}}).values());
}

TEST(Binarize, ConstantGivesZerosWithWarning) {
  const auto out =
      preprocess::binarize(from_rows({{3, 3}, {3, 3}}), preprocess::Threshold::parse("median"));
  EXPECT_TRUE(out.matrix.values().isZero());
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Binarize, ZeroThresholdOnPositiveMatrix) {
  const auto out =
      preprocess::binarize(from_rows({{0.5, 2}, {3, 7}}), preprocess::Threshold::parse("0"));
  EXPECT_TRUE((out.matrix.values().array() == 1.0).all());
  EXPECT_THROW(preprocess::Threshold::parse("half"), ParameterError);
}

TEST(Discretize, EqualWidthBoundary) {
  const auto out = preprocess::discretize(from_rows({{0, 1, 2, 3}}), 2,
                                          preprocess::DiscretizeScheme::equal_width);
  EXPECT_EQ(out.matrix.values(), from_rows({{0, 0, 1, 1}}).values());
}

TEST(Discretize, ConstantAndBadLevels) {
  const auto out = preprocess::discretize(from_rows({{4, 4}, {4, 4}}), 3,
                                          preprocess::DiscretizeScheme::equal_width);
  EXPECT_TRUE(out.matrix.values().isZero());
  EXPECT_THROW(preprocess::discretize(from_rows({{0, 1}}), 1,
                                      preprocess::DiscretizeScheme::equal_width),
               ParameterError);
}

TEST(Discretize, LevelsStayInRange) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int levels = 2 + static_cast<int>(rng.index(6));
    const auto scheme = trial % 2 ? preprocess::DiscretizeScheme::equal_frequency
                                  : preprocess::DiscretizeScheme::equal_width;
    const auto m = labeled(random_matrix(1 + rng.index(10), 1 + rng.index(10), rng));
    const auto out = preprocess::discretize(m, levels, scheme).matrix.values();
    for (Eigen::Index c = 0; c < out.size(); ++c) {
      EXPECT_EQ(out(c), std::floor(out(c)));
      EXPECT_GE(out(c), 0);
      EXPECT_LT(out(c), levels);
    }
    // Order-preserving: a larger value never gets a smaller level.
    const Matrix& x = m.values();
    for (Eigen::Index a = 0; a < x.size(); ++a)
      for (Eigen::Index b = 0; b < x.size(); ++b)
        if (x(a) < x(b)) EXPECT_LE(out(a), out(b));
  }
}

TEST(Normalize, BistochastizeRandomPositive) {
  Rng rng(21);
  const Matrix x = random_matrix(20, 15, rng, 0.1, 5.0);
  const auto r = preprocess::bistochastize_values(x, 1e-6, 1000);
  EXPECT_LE(r.residual, 1e-6);
  const Vector rm = r.values.rowwise().mean(), cm = r.values.colwise().mean().transpose();
  EXPECT_LE(rm.maxCoeff() - rm.minCoeff(), 2e-6);
  EXPECT_LE(cm.maxCoeff() - cm.minCoeff(), 2e-6);
  EXPECT_LE(std::abs(rm.mean() - cm.mean()), 2e-6);
}

TEST(Normalize, BistochastizePreservesScalingStructure) {
  // The result is D1 * X * D2: ratios x_ij x_kl / (x_il x_kj) are unchanged.
  Rng rng(8);
  const Matrix x = random_matrix(6, 5, rng, 0.5, 3.0);
  const Matrix y = preprocess::bistochastize_values(x, 1e-10, 1000).values;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) {
      const double rx = x(i, j) * x(i + 1, j + 1) / (x(i, j + 1) * x(i + 1, j));
      const double ry = y(i, j) * y(i + 1, j + 1) / (y(i, j + 1) * y(i + 1, j));
      EXPECT_NEAR(rx, ry, 1e-9 * rx);
    }
}

TEST(Normalize, ZscoreRows) {
  Rng rng(4);
  const auto m = labeled(random_matrix(8, 6, rng, -3, 9));
  const auto out = preprocess::normalize(m, preprocess::Normalization::zscore_rows).matrix.values();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double mu = out.row(i).mean();
    EXPECT_NEAR(mu, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt((out.row(i).array() - mu).square().mean()), 1.0, 1e-9);
  }
}

TEST(Normalize, Log2ExactPowers) {
  const auto out =
      preprocess::normalize(from_rows({{1, 2}, {4, 8}}), preprocess::Normalization::log2);
  EXPECT_EQ(out.matrix.values(), from_rows({{0, 1}, {2, 3}}).values());
  EXPECT_THROW(preprocess::normalize(from_rows({{0, 2}}), preprocess::Normalization::log2),
               DomainError);
}

TEST(Normalize, BistochastizeNeedsPositiveValues) {
  EXPECT_THROW(
      preprocess::normalize(from_rows({{1, -2}, {3, 4}}), preprocess::Normalization::bistochastize),
      DomainError);
}

TEST(Pipeline, StepsRunInOrder) {
  const auto m = from_rows({{1, 2}, {3, 5}});
  const Json steps = Json::parse(
      R"([{"op":"shift_positive"},{"op":"binarize","threshold":"median"}])");
  const auto out = preprocess::apply_pipeline(m, steps);
  EXPECT_EQ(out.matrix.values(), from_rows({{0, 0}, {1, 1}}).values());
  const auto again = preprocess::apply_pipeline(m, Json{{"steps", steps}});
  EXPECT_EQ(again.matrix, out.matrix);
}

TEST(Pipeline, BadStepsAreParameterErrors) {
  const auto m = from_rows({{1, 2}, {3, 5}});
  EXPECT_THROW(preprocess::apply_pipeline(m, Json::parse(R"([{"op":"smooth"}])")), ParameterError);
  EXPECT_THROW(preprocess::apply_pipeline(m, Json::parse(R"([{"op":"binarize","cut":1}])")),
               ParameterError);
  EXPECT_THROW(preprocess::apply_pipeline(m, Json::parse(R"([3])")), ParameterError);
  EXPECT_THROW(preprocess::apply_pipeline(m, Json::parse(R"([{"op":"discretize","levels":"x"}])")),
               ParameterError);
}

// ---------------------------------------------------------------------------
// Validation indices

TEST(Msr, Examples) {
  EXPECT_EQ(msr(Matrix::Constant(3, 4, 2.5)), 0.0);
  EXPECT_NEAR(msr(from_rows({{1, 2}, {3, 5}}).values()), 0.0625, 1e-12);
  Matrix add(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) add(i, j) = 0.7 * i - 1.3 * j + 2;
  EXPECT_NEAR(msr(add), 0.0, 1e-12);
}

TEST(Msr, AdditiveMatricesAndDirectOracle) {
  Rng rng(1234);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = 1 + rng.index(20), k = 1 + rng.index(15);
    Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    std::vector<double> r(n), c(k);
    for (auto& v : r) v = rng.uniform(-10, 10);
    for (auto& v : c) v = rng.uniform(-10, 10);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) a(i, j) = r[i] + c[j];
    EXPECT_LE(msr(a), 1e-9);
    const Matrix x = random_matrix(n, k, rng, -5, 5);
    EXPECT_NEAR(msr(x), testing_support::msr_oracle(x), 1e-10);
  }
}

TEST(Msr, InvariantUnderRowAndColumnShifts) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix x = random_matrix(2 + rng.index(6), 2 + rng.index(6), rng);
    const double before = msr(x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i).array() += rng.uniform(-3, 3);
    for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j).array() += rng.uniform(-3, 3);
    EXPECT_NEAR(msr(x), before, 1e-9);
    EXPECT_GE(before, 0.0);
  }
}

TEST(ConstantVariance, Examples) {
  EXPECT_EQ(constant_variance(Matrix::Constant(2, 3, 4.0)), 0.0);
  EXPECT_NEAR(constant_variance(from_rows({{1, 2}, {3, 5}}).values()), 2.1875, 1e-12);
  EXPECT_EQ(constant_variance(Matrix::Constant(1, 1, 9.0)), 0.0);
}

TEST(SignVariance, Examples) {
  EXPECT_EQ(sign_variance(from_rows({{1, 2, 3}, {0, 5, 9}}).values()), 0.0);
  EXPECT_EQ(sign_variance(from_rows({{1, 3, 2}, {0, 9, 5}, {4, 6, 5}}).values()), 0.0);
  EXPECT_NEAR(sign_variance(from_rows({{1, 2}, {2, 1}}).values()), 1.0, 1e-12);
}

TEST(Jaccard, Examples) {
  const auto a = make_bicluster({0, 1}, {0, 1});
  EXPECT_EQ(jaccard(a, a), 1.0);
  EXPECT_EQ(jaccard(a, make_bicluster({2, 3}, {0, 1})), 0.0);
  EXPECT_NEAR(jaccard(a, make_bicluster({1, 2}, {0, 1})), 1.0 / 3.0, 1e-12);
}

TEST(Jaccard, AgreesWithCellSetCounting) {
  Rng rng(5);
  auto random_bicluster = [&] {
    return make_bicluster(rng.sample(8, 1 + rng.index(8)), rng.sample(6, 1 + rng.index(6)));
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_bicluster(), b = random_bicluster();
    std::set<std::pair<std::size_t, std::size_t>> ca, cb, uni;
    for (auto i : a.rows)
      for (auto j : a.cols) ca.insert({i, j});
    for (auto i : b.rows)
      for (auto j : b.cols) cb.insert({i, j});
    std::size_t inter = 0;
    for (const auto& c : ca) inter += cb.count(c);
    uni = ca;
    uni.insert(cb.begin(), cb.end());
    EXPECT_NEAR(jaccard(a, b), static_cast<double>(inter) / uni.size(), 1e-12);
    EXPECT_EQ(jaccard(a, b), jaccard(b, a));
  }
}

TEST(Hausdorff, Examples) {
  const Matrix s = from_rows({{1, 2}, {3, 5}}).values();
  EXPECT_EQ(hausdorff(s, s), 0.0);
  EXPECT_EQ(hausdorff(Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 3.0)), 3.0);
  EXPECT_EQ(hausdorff(from_rows({{0, 1}}).values(), from_rows({{0, 5}}).values()), 4.0);
}

TEST(Hausdorff, MatchesBruteForceSupInf) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = random_matrix(1 + rng.index(4), 1 + rng.index(4), rng, -5, 5);
    const Matrix b = random_matrix(1 + rng.index(4), 1 + rng.index(4), rng, -5, 5);
    auto directed = [](const Matrix& x, const Matrix& y) {
      double sup = 0;
      for (Eigen::Index p = 0; p < x.size(); ++p) {
        double inf = 1e300;
        for (Eigen::Index q = 0; q < y.size(); ++q) inf = std::min(inf, std::abs(x(p) - y(q)));
        sup = std::max(sup, inf);
      }
      return sup;
    };
    EXPECT_DOUBLE_EQ(hausdorff(a, b), std::max(directed(a, b), directed(b, a)));
    EXPECT_EQ(hausdorff(a, b), hausdorff(b, a));
  }
}

TEST(SbScore, IdenticalConditionSetsGiveZero) {
  Rng rng(3);
  const auto m = labeled(random_matrix(5, 6, rng));
  const auto b = make_bicluster({0, 1, 2, 3}, {0, 1, 2});
  EXPECT_NEAR(sb_score(m, b, IndexList{0, 1, 2}).value, 0.0, 1e-15);
}

TEST(SbScore, CorrelatedGenesScorePositive) {
  int positive = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    Matrix x(6, 16);
    std::vector<double> base(8);
    for (auto& v : base) v = rng.normal();
    for (int i = 0; i < 6; ++i) {
      const double scale = rng.uniform(0.5, 2.0), shift = rng.normal();
      for (int j = 0; j < 8; ++j) x(i, j) = shift + scale * base[j];
      for (int j = 8; j < 16; ++j) x(i, j) = rng.normal();
    }
    const auto m = labeled(x);
    const auto b = make_bicluster(synth::index_range(0, 6), synth::index_range(0, 8));
    const auto r = sb_score(m, b);
    EXPECT_NEAR(r.components.t1, 1.0, 1e-12);
    if (r.value > 0) ++positive;
  }
  EXPECT_GE(positive, 95);
}

TEST(SbScore, SingleGeneIsUndefined) {
  const auto m = from_rows({{1, 2, 3, 4}, {2, 3, 4, 5}});
  EXPECT_THROW(sb_score(m, make_bicluster({0}, {0, 1})), UndefinedIndexError);
}

TEST(OverallMse, Examples) {
  const auto m = from_rows({{1, 2, 7}, {3, 5, 7}});
  BiclusterSet s;
  s.biclusters = {make_bicluster({0, 1}, {2})};
  EXPECT_EQ(overall_mse(m, s), 0.0);
  s.biclusters = {make_bicluster({0, 1}, {0, 1}), make_bicluster({0, 1}, {2})};
  EXPECT_NEAR(overall_mse(m, s), 0.03125, 1e-12);
  s.biclusters.clear();
  EXPECT_THROW(overall_mse(m, s), UndefinedIndexError);
}

TEST(Validate, ReportAggregatesAreColumnMeans) {
  Rng rng(12);
  const auto m = labeled(random_matrix(10, 8, rng));
  BiclusterSet s;
  for (int k = 0; k < 4; ++k)
    s.biclusters.push_back(make_bicluster(rng.sample(10, 3 + k), rng.sample(8, 2 + k)));
  const auto rep = validate(m, s);
  ASSERT_EQ(rep.per_bicluster.size(), 4u);
  double acc = 0;
  for (const auto& pb : rep.per_bicluster) acc += *pb.msr;
  EXPECT_NEAR(*rep.mean_msr, acc / 4, 1e-12);
  ASSERT_TRUE(rep.jaccard);
  for (int k = 0; k < 4; ++k) EXPECT_EQ((*rep.jaccard)(k, k), 1.0);
  const Json j = to_json(rep);
  EXPECT_EQ(j["indices"].size(), 6u);
  EXPECT_TRUE(j.contains("hausdorff"));
  EXPECT_FALSE(to_json(rep, "overall").contains("per_bicluster"));
  EXPECT_FALSE(to_json(rep, "individual").contains("aggregate"));
}

TEST(Validate, IndexNames) {
  EXPECT_EQ(index_from_string("mse"), Index::msr);
  EXPECT_EQ(index_from_string("sb"), Index::sb_score);
  EXPECT_THROW(index_from_string("entropy"), ParameterError);
}

// ---------------------------------------------------------------------------
// Synthetic data

TEST(Synth, NoiselessConstantPlant) {
  synth::PlantedSpec spec;
  spec.rows = 10;
  spec.cols = 6;
  spec.noise_sd = 0;
  spec.plants = {synth::constant_plant(synth::index_range(0, 5), synth::index_range(0, 3), 5.0)};
  const auto g = synth::generate(spec, 1);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 6; ++j) EXPECT_EQ(g.matrix(i, j), (i < 5 && j < 3) ? 5.0 : 0.0);
  ASSERT_EQ(g.truth.size(), 1u);
  EXPECT_EQ(g.truth.biclusters[0].rows, synth::index_range(0, 5));
}

TEST(Synth, NoiselessAdditivePlantHasZeroResidue) {
  synth::PlantedSpec spec;
  spec.rows = 12;
  spec.cols = 9;
  spec.noise_sd = 0;
  spec.plants = {synth::additive_plant({1, 4, 5, 9}, {0, 2, 7}, 3.0)};
  const auto g = synth::generate(spec, 6);
  EXPECT_NEAR(msr(g.matrix, g.truth.biclusters[0]), 0.0, 1e-12);
}

TEST(Synth, SameSeedSameMatrix) {
  const Json j = Json::parse(
      R"({"rows":20,"cols":10,"noise_sd":1,"plants":[{"kind":"constant","rows":[0,1,2],"cols":[4,5],"level":3}]})");
  const auto spec = synth::spec_from_json(j);
  EXPECT_EQ(synth::generate(spec, 99).matrix, synth::generate(spec, 99).matrix);
  EXPECT_FALSE(synth::generate(spec, 99).matrix == synth::generate(spec, 100).matrix);
}

TEST(Synth, SpecErrors) {
  synth::PlantedSpec spec;
  spec.rows = 4;
  spec.cols = 4;
  spec.plants = {synth::constant_plant({0, 7}, {0}, 1)};
  EXPECT_THROW(synth::generate(spec, 1), SpecError);
  spec.plants = {synth::constant_plant({0, 0}, {0}, 1)};
  EXPECT_THROW(synth::generate(spec, 1), SpecError);
}

TEST(Recovery, Examples) {
  BiclusterSet truth, found;
  truth.biclusters = {make_bicluster({0, 1, 2}, {0, 1})};
  EXPECT_EQ(synth::recovery_score(truth, truth).recovery, 1.0);
  EXPECT_EQ(synth::recovery_score(truth, truth).relevance, 1.0);
  found.biclusters = {make_bicluster({5, 6}, {3})};
  EXPECT_EQ(synth::recovery_score(found, truth).recovery, 0.0);
  EXPECT_EQ(synth::recovery_score(found, truth).relevance, 0.0);
  found.biclusters = {truth.biclusters[0], make_bicluster({5, 6}, {3})};
  EXPECT_EQ(synth::recovery_score(found, truth).recovery, 1.0);
  EXPECT_EQ(synth::recovery_score(found, truth).relevance, 0.5);
}

// ---------------------------------------------------------------------------
// Visualization

namespace {

std::vector<XmlElement> render_parsed(const ExpressionMatrix& m, const BiclusterSet& s,
                                      viz::RenderSpec spec) {
  const std::string doc = viz::render(m, s, spec);
  try {
    return parse_xml(doc);
  } catch (const std::exception& e) {
    ADD_FAILURE() << "malformed document: " << e.what();
    return {};
  }
}

}  // namespace

TEST(Heatmap, TwoByTwoHasFourCells) {
  const auto els = render_parsed(from_rows({{1, 2}, {3, 4}}), {}, {});
  EXPECT_EQ(select(els, "rect", "cell").size(), 4u);
  EXPECT_EQ(els.front().name, "svg");
}

TEST(Heatmap, ConstantMatrixHasOneColor) {
  const auto cells = select(render_parsed(from_rows({{2, 2, 2}, {2, 2, 2}}), {}, {}), "rect", "cell");
  ASSERT_EQ(cells.size(), 6u);
  for (const auto& c : cells) EXPECT_EQ(c.attr("fill"), cells[0].attr("fill"));
}

TEST(Heatmap, HighlightMovesBiclusterToTheFront) {
  BiclusterSet s;
  s.biclusters = {make_bicluster({1}, {1})};
  viz::RenderSpec spec;
  spec.bicluster = 0;
  spec.highlight = true;
  const auto els = render_parsed(from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}), s, spec);
  const auto cells = select(els, "rect", "cell");
  ASSERT_EQ(cells.size(), 9u);
  EXPECT_EQ(cells[0].attr("data-row"), "1");
  EXPECT_EQ(cells[0].attr("data-col"), "1");
  EXPECT_EQ(cells[0].num("x"), 0.0);
  EXPECT_EQ(cells[0].num("y"), 0.0);
  EXPECT_EQ(select(els, "rect", "outline").size(), 1u);
}

TEST(Heatmap, MissingCellsAreMarked) {
  const auto m = parse_matrix("id\ta\tb\nr\t1\tNA\n");
  const auto cells = select(render_parsed(m, {}, {}), "rect", "cell");
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[1].attrs.count("data-missing"), 1u);
}

TEST(GenePlot, OneRowOnePolyline) {
  BiclusterSet s;
  s.biclusters = {make_bicluster({1}, {0, 1, 2})};
  viz::RenderSpec spec;
  spec.kind = viz::PlotKind::gene_plot;
  spec.bicluster = 0;
  const auto els = render_parsed(from_rows({{1, 2, 3}, {4, 5, 6}}), s, spec);
  EXPECT_EQ(select(els, "polyline", "gene").size(), 1u);
}

TEST(GenePlot, ConstantBiclusterLinesCoincide) {
  BiclusterSet s;
  s.biclusters = {make_bicluster({0, 1, 2}, {0, 1, 2})};
  viz::RenderSpec spec;
  spec.kind = viz::PlotKind::gene_plot;
  spec.bicluster = 0;
  const auto lines = select(render_parsed(labeled(Matrix::Constant(3, 3, 4.0)), s, spec), "polyline");
  ASSERT_EQ(lines.size(), 3u);
  const auto first = polyline_points(lines[0].attr("points"));
  for (const auto& l : lines) {
    const auto pts = polyline_points(l.attr("points"));
    ASSERT_EQ(pts.size(), 3u);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      EXPECT_EQ(pts[k].second, first[0].second);
      EXPECT_EQ(pts[k], first[k]);
    }
  }
}

TEST(GenePlot, AdditiveBiclusterLinesAreTranslates) {
  synth::PlantedSpec spec;
  spec.rows = 10;
  spec.cols = 7;
  spec.noise_sd = 0;
  spec.plants = {synth::additive_plant({1, 3, 4, 8}, {0, 2, 3, 6}, 2.0)};
  const auto g = synth::generate(spec, 17);
  viz::RenderSpec rs;
  rs.kind = viz::PlotKind::gene_plot;
  rs.bicluster = 0;
  const auto lines = select(render_parsed(g.matrix, g.truth, rs), "polyline", "gene");
  ASSERT_EQ(lines.size(), 4u);
  const auto base = polyline_points(lines[0].attr("points"));
  for (const auto& l : lines) {
    const auto pts = polyline_points(l.attr("points"));
    ASSERT_EQ(pts.size(), base.size());
    const double d0 = pts[0].second - base[0].second;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      EXPECT_EQ(pts[k].first, base[k].first);
      EXPECT_NEAR(pts[k].second - base[k].second, d0, 1e-9);
    }
  }
}

TEST(ClusterPlot, EmptySetIsSilhouetteOnly) {
  viz::RenderSpec spec;
  spec.kind = viz::PlotKind::cluster_plot;
  const auto els = render_parsed(from_rows({{1, 2}, {3, 4}}), {}, spec);
  EXPECT_EQ(select(els, "rect", "matrix").size(), 1u);
  EXPECT_EQ(select(els, "rect", "bicluster").size(), 0u);
}

TEST(ClusterPlot, DisjointBiclustersDoNotOverlap) {
  Rng rng(2);
  BiclusterSet s;
  s.biclusters = {make_bicluster({0, 1}, {0, 1}), make_bicluster({3, 4}, {3, 4})};
  viz::RenderSpec spec;
  spec.kind = viz::PlotKind::cluster_plot;
  const auto els = render_parsed(labeled(random_matrix(5, 5, rng)), s, spec);
  const auto rects = select(els, "rect", "bicluster");
  ASSERT_EQ(rects.size(), 2u);
  const auto& a = rects[0];
  const auto& b = rects[1];
  const bool apart = a.num("x") + a.num("width") <= b.num("x") ||
                     b.num("x") + b.num("width") <= a.num("x") ||
                     a.num("y") + a.num("height") <= b.num("y") ||
                     b.num("y") + b.num("height") <= a.num("y");
  EXPECT_TRUE(apart);
  EXPECT_TRUE(select(els, "rect", "overlap").empty());
}

TEST(ClusterPlot, OverlapCarriesBothIds) {
  Rng rng(2);
  BiclusterSet s;
  s.biclusters = {make_bicluster({0, 1, 2}, {0, 1, 2}), make_bicluster({2, 3}, {1, 2, 3})};
  viz::RenderSpec spec;
  spec.kind = viz::PlotKind::cluster_plot;
  const auto overlaps = select(render_parsed(labeled(random_matrix(5, 5, rng)), s, spec), "rect", "overlap");
  ASSERT_EQ(overlaps.size(), 1u);
  EXPECT_EQ(overlaps[0].attr("data-ids"), "0 1");
}

TEST(Viz, RandomDocumentsAreWellFormed) {
  Rng rng(31);
  const char* maps[] = {"bwr", "gray", "viridis"};
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = 2 + rng.index(9), k = 2 + rng.index(7);
    std::vector<std::string> rows(n), cols(k);
    for (std::size_t i = 0; i < n; ++i) rows[i] = "g<" + std::to_string(i) + ">&\"x\"";
    for (std::size_t j = 0; j < k; ++j) cols[j] = "c'" + std::to_string(j);
    const ExpressionMatrix m(rows, cols, random_matrix(n, k, rng, -4, 4));
    BiclusterSet s;
    for (int b = 0; b < 3; ++b)
      s.biclusters.push_back(make_bicluster(rng.sample(n, 1 + rng.index(n)), rng.sample(k, 1 + rng.index(k))));
    for (auto kind : {viz::PlotKind::heatmap, viz::PlotKind::gene_plot, viz::PlotKind::cluster_plot}) {
      viz::RenderSpec spec;
      spec.kind = kind;
      spec.colormap = maps[trial % 3];
      spec.bicluster = rng.index(3);
      spec.highlight = rng.bernoulli(0.5);
      EXPECT_NO_THROW(parse_xml(viz::render(m, s, spec)));
    }
  }
}

TEST(Viz, BadSpecs) {
  const auto m = from_rows({{1, 2}, {3, 4}});
  viz::RenderSpec spec;
  spec.bicluster = 0;
  EXPECT_THROW(viz::render(m, {}, spec), ValidationError);
  spec.bicluster.reset();
  spec.colormap = "rainbow";
  EXPECT_THROW(viz::render(m, {}, spec), ParameterError);
  spec.colormap = "gray";
  spec.width = 0;
  EXPECT_THROW(viz::render(m, {}, spec), ValidationError);
  EXPECT_THROW(viz::plot_kind_from_string("pie"), ParameterError);
}

TEST(XmlChecker, RejectsMalformedDocuments) {
  EXPECT_THROW(parse_xml("<svg><rect></svg>"), std::runtime_error);
  EXPECT_THROW(parse_xml("<svg a=1/>"), std::runtime_error);
  EXPECT_THROW(parse_xml("<svg>&bogus;</svg>"), std::runtime_error);
  EXPECT_THROW(parse_xml("<a/><b/>"), std::runtime_error);
  EXPECT_NO_THROW(parse_xml("<?xml version=\"1.0\"?>\n<svg><g a=\"&amp;\"/></svg>\n"));
}
