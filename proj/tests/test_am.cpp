#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "hdemg/am.hpp"
#include "hdemg/experiment.hpp"
#include "synthetic_fixture.hpp"

using namespace hdemg;

namespace {

const ClassLabel kFist{Gesture::fist, std::nullopt};
const ClassLabel kOne{Gesture::one, std::nullopt};

EncoderConfig small_config(std::size_t dim = 256) {
  EncoderConfig c;
  c.dim = dim;
  c.levels = 4;
  c.ngram = 2;
  c.channels = 3;
  return c;
}

AssociativeMemory two_class_model(const Hypervector& a, const Hypervector& b) {
  AssociativeMemory am(small_config(a.dim()), ModelSeeds::from_root(1), ModelMode::gesture_only);
  am.insert(Prototype{kFist, a, 1});
  am.insert(Prototype{kOne, b, 1});
  return am;
}

// Encodes hold vectors of subject 1's synthetic trials with bounds fitted on
// trial 1 of every context.
class SyntheticVectors {
 public:
  SyntheticVectors() : fe_(fixture::default_frames(), ExperimentOptions{}, 64) {
    const auto& ds = fixture::default_dataset();
    fe_.fit(1, ds.gestures(1), kAllEfforts, 1);
  }
  [[nodiscard]] std::vector<Hypervector> encode(Gesture g, Effort e, int trial) const {
    return fe_.encode(1, g, e, trial);
  }
  [[nodiscard]] const Hypervector& tiebreak() const { return fe_.encoder().tiebreak(); }
  [[nodiscard]] AssociativeMemory empty_model() const { return fe_.empty_model(ModelMode::gesture_only); }

 private:
  detail::FoldEncoder fe_;
};

const SyntheticVectors& synthetic() {
  static const SyntheticVectors v;
  return v;
}

AssociativeMemory canonical_model() {
  EncoderConfig c;
  c.dim = 128;
  c.levels = 4;
  c.ngram = 2;
  c.channels = 3;
  c.bounds = {{0.0, 1.0}, {0.5, 2.0}, {-1.0, 1.0}};
  AssociativeMemory am(c, ModelSeeds::from_root(7), ModelMode::gesture_effort);
  am.insert(Prototype{ClassLabel{Gesture::fist, Effort::high}, random_hypervector(Seed{1, "p"}, 128), 3});
  am.insert(Prototype{ClassLabel{Gesture::one, Effort::low}, random_hypervector(Seed{2, "p"}, 128), 5});
  return am;
}

std::uint64_t le(const std::vector<std::uint8_t>& b, std::size_t off, int n) {
  std::uint64_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

TEST(TrainClass, SingleVectorIsPrototype) {
  const auto v = random_hypervector(Seed{1, "v"}, 256);
  const auto p = train_class(std::vector<Hypervector>{v}, kFist, random_hypervector(Seed{1, "t"}, 256));
  EXPECT_EQ(p.vector, v);
  EXPECT_EQ(p.n_trained, 1u);
  EXPECT_THROW(train_class({}, kFist, v), DataError);
}

TEST(TrainClass, MajorityDominance) {
  const auto v = random_hypervector(Seed{2, "v"}, 1000);
  const auto r = random_hypervector(Seed{2, "r"}, 1000);
  const std::vector<Hypervector> set = {v, v, v, r};
  const auto p = train_class(set, kFist, random_hypervector(Seed{2, "t"}, 1000));
  EXPECT_EQ(p.vector, v);
  EXPECT_GE(cosine(p.vector, v), cosine(p.vector, r));
  EXPECT_EQ(p.n_trained, 4u);
}

TEST(TrainClass, SyntheticTrialPrototypeResemblesConstituents) {
  const auto vs = synthetic().encode(Gesture::middle_flexion, Effort::medium, 2);
  ASSERT_EQ(vs.size(), 76u);
  const auto p = train_class(vs, ClassLabel{Gesture::middle_flexion, std::nullopt}, synthetic().tiebreak());
  for (const auto& v : vs) EXPECT_GT(cosine(p.vector, v), 0.3);
}

TEST(TrainMulticontext, IdenticalContextsMatchSingleContext) {
  std::vector<Hypervector> set;
  for (std::uint64_t i = 0; i < 6; ++i) set.push_back(random_hypervector(derive(Seed{3, "s"}, "v", i), 512));
  const auto tie = random_hypervector(Seed{3, "t"}, 512);
  const std::map<Effort, std::vector<Hypervector>> per = {
      {Effort::low, set}, {Effort::medium, set}, {Effort::high, set}};
  EXPECT_EQ(train_multicontext(per, Gesture::two, tie).vector, train_class(set, kFist, tie).vector);
  EXPECT_EQ(train_multicontext(per, Gesture::two, tie).label, (ClassLabel{Gesture::two, std::nullopt}));
  EXPECT_THROW(train_multicontext({{Effort::low, set}}, Gesture::two, tie), ConfigError);
  EXPECT_THROW(train_multicontext({{Effort::low, set}, {Effort::high, {}}}, Gesture::two, tie), DataError);
}

TEST(TrainMulticontext, EqualCountsResembleEveryContext) {
  const auto& s = synthetic();
  std::map<Effort, std::vector<Hypervector>> per;
  for (auto e : kAllEfforts) per[e] = s.encode(Gesture::thumb_extension, e, 1);
  const auto joint = train_multicontext(per, Gesture::thumb_extension, s.tiebreak());
  for (auto e : kAllEfforts) {
    const auto own = train_class(per[e], ClassLabel{Gesture::thumb_extension, std::nullopt}, s.tiebreak());
    EXPECT_GT(cosine(joint.vector, own.vector), 0.0) << to_string(e);
  }
}

// Monte-Carlo: each context is a noisy copy of a shared gesture vector with
// the same spread, so only the window counts differ between contexts. Window
// noise is high enough that no context's vote saturates.
TEST(TrainMulticontext, UnequalCountsFavourLargerContexts) {
  constexpr std::size_t dim = 10000;
  const auto tie = random_hypervector(Seed{3, "tie"}, dim);
  auto flip = [](Hypervector v, double p, Rng& rng) {
    for (std::size_t i = 0; i < v.dim(); ++i) {
      if (rng.uniform() < p) v.set_bit(i, !v.bit(i));
    }
    return v;
  };
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    Rng rng(derive(Seed{11, "multicontext"}, "rep", rep));
    const auto gesture = random_hypervector(derive(Seed{11, "gesture"}, "rep", rep), dim);
    const std::map<Effort, std::size_t> counts = {{Effort::low, 40}, {Effort::medium, 76}, {Effort::high, 76}};
    std::map<Effort, std::vector<Hypervector>> per;
    std::map<Effort, Hypervector> centre;
    for (const auto& [e, n] : counts) {
      centre[e] = flip(gesture, 0.3, rng);
      for (std::size_t w = 0; w < n; ++w) per[e].push_back(flip(centre[e], 0.45, rng));
    }
    const auto joint = train_multicontext(per, Gesture::fist, tie);
    EXPECT_EQ(joint.n_trained, 192u);
    std::map<Effort, double> sim;
    for (auto e : kAllEfforts) sim[e] = cosine(joint.vector, train_class(per[e], kFist, tie).vector);
    EXPECT_GT(sim[Effort::medium], sim[Effort::low]) << "rep " << rep;
    EXPECT_GT(sim[Effort::high], sim[Effort::low]) << "rep " << rep;
  }
}

TEST(AssociativeMemory, InsertValidation) {
  AssociativeMemory am(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_only);
  const auto v = random_hypervector(Seed{1, "v"}, 256);
  am.insert(Prototype{kFist, v, 1});
  EXPECT_THROW(am.insert(Prototype{kFist, v, 1}), ConfigError);
  EXPECT_THROW(am.insert(Prototype{kOne, random_hypervector(Seed{1, "w"}, 128), 1}), DimensionError);
  EXPECT_THROW(am.insert(Prototype{ClassLabel{Gesture::one, Effort::low}, v, 1}), ConfigError);
  EXPECT_THROW(am.insert(Prototype{kOne, v, 0}), DataError);
}

TEST(Classify, ExactAndNegatedQueries) {
  const auto a = random_hypervector(Seed{4, "a"}, 256);
  const auto b = random_hypervector(Seed{4, "b"}, 256);
  const auto am = two_class_model(a, b);
  const auto c = am.classify(b);
  EXPECT_EQ(c.label, kOne);
  EXPECT_DOUBLE_EQ(c.similarity, 1.0);
  EXPECT_EQ(c.all_scores.size(), 2u);
  for (const auto& [label, s] : c.all_scores) {
    EXPECT_LE(s, c.similarity);
    EXPECT_GE(s, -1.0);
  }

  AssociativeMemory single(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_only);
  single.insert(Prototype{kFist, a, 1});
  const auto neg = single.classify(-a);
  EXPECT_EQ(neg.label, kFist);
  EXPECT_DOUBLE_EQ(neg.similarity, -1.0);

  AssociativeMemory empty(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_only);
  EXPECT_THROW((void)empty.classify(a), ConfigError);
  EXPECT_THROW((void)am.classify(random_hypervector(Seed{4, "c"}, 128)), DimensionError);
}

TEST(Classify, TiesGoToLowestLabel) {
  const auto a = random_hypervector(Seed{5, "a"}, 256);
  AssociativeMemory am(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_only);
  am.insert(Prototype{kFist, a, 1});
  am.insert(Prototype{ClassLabel{Gesture::index_flexion, std::nullopt}, a, 1});
  EXPECT_EQ(am.classify(a).label.gesture, Gesture::index_flexion);
}

TEST(Classify, SyntheticWithinContextQuery) {
  const auto& s = synthetic();
  auto model = s.empty_model();
  const auto gestures = fixture::default_dataset().gestures(1);
  for (auto g : gestures) model.insert(train_class(s.encode(g, Effort::medium, 1), {g, std::nullopt}, s.tiebreak()));
  for (auto g : gestures) {
    const auto q = s.encode(g, Effort::medium, 3);
    const auto c = model.classify(q[q.size() / 2]);
    EXPECT_EQ(c.label.gesture, g);
    EXPECT_GT(c.similarity, 0.2);
  }
}

TEST(ClassifyGestureOnly, ProjectsWinner) {
  const auto a = random_hypervector(Seed{6, "a"}, 256);
  const auto b = random_hypervector(Seed{6, "b"}, 256);
  AssociativeMemory am(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_effort);
  am.insert(Prototype{ClassLabel{Gesture::fist, Effort::high}, a, 1});
  am.insert(Prototype{ClassLabel{Gesture::one, Effort::low}, b, 1});
  const auto joint = am.classify(a);
  EXPECT_EQ(joint.label, (ClassLabel{Gesture::fist, Effort::high}));
  const auto projected = am.classify_gesture_only(a);
  EXPECT_EQ(projected.label, kFist);
  EXPECT_DOUBLE_EQ(projected.similarity, 1.0);
  EXPECT_THROW((void)two_class_model(a, b).classify_gesture_only(a), ConfigError);
}

TEST(ClassifyTrial, MajorityVote) {
  const auto a = random_hypervector(Seed{7, "a"}, 256);
  const auto b = random_hypervector(Seed{7, "b"}, 256);
  const auto am = two_class_model(a, b);
  std::vector<Hypervector> same(10, a);
  EXPECT_EQ(classify_trial(am, same).majority, kFist);

  std::vector<Hypervector> split(40, b);
  split.insert(split.end(), 36, a);
  const auto r = classify_trial(am, split);
  EXPECT_EQ(r.majority, kOne);
  EXPECT_DOUBLE_EQ(score_trial(r, kOne, Aggregation::per_window), 40.0 / 76.0);
  EXPECT_DOUBLE_EQ(score_trial(r, kOne, Aggregation::majority), 1.0);
  EXPECT_DOUBLE_EQ(score_trial(r, kFist, Aggregation::majority), 0.0);

  std::vector<Hypervector> tie(3, b);
  tie.insert(tie.end(), 3, a);
  EXPECT_EQ(classify_trial(am, tie).majority.gesture, Gesture::one);  // lower ordinal
  EXPECT_THROW(classify_trial(am, {}), DataError);
}

TEST(MergeModels, SelfMergeIsIdentity) {
  const auto am = two_class_model(random_hypervector(Seed{8, "a"}, 256), random_hypervector(Seed{8, "b"}, 256));
  EXPECT_EQ(merge_models(am, am, Seed{1, "m"}), am);
}

TEST(MergeModels, TakesSeededHalfFromEachParent) {
  const auto a = two_class_model(random_hypervector(Seed{9, "a"}, 256), random_hypervector(Seed{9, "b"}, 256));
  const auto b = two_class_model(random_hypervector(Seed{9, "c"}, 256), random_hypervector(Seed{9, "d"}, 256));
  const Seed seed{3, "merge"};
  const auto m = merge_models(a, b, seed);
  for (const auto& p : m.prototypes()) {
    const auto& pa = a.find(p.label)->vector;
    const auto& pb = b.find(p.label)->vector;
    const auto mask = random_hypervector(derive(seed, "merge", static_cast<std::uint64_t>(p.label.gesture)), 256);
    std::size_t from_a = 0;
    for (std::size_t i = 0; i < 256; ++i) {
      EXPECT_EQ(p.vector.bit(i), mask.bit(i) ? pa.bit(i) : pb.bit(i));
      from_a += mask.bit(i) ? 1 : 0;
    }
    EXPECT_EQ(from_a, 128u);
  }
}

TEST(MergeModels, RejectsIncompatibleModels) {
  const auto v = random_hypervector(Seed{10, "a"}, 256);
  const auto a = two_class_model(v, -v);
  AssociativeMemory other_seeds(small_config(), ModelSeeds::from_root(2), ModelMode::gesture_only);
  other_seeds.insert(Prototype{kFist, v, 1});
  other_seeds.insert(Prototype{kOne, -v, 1});
  EXPECT_THROW(merge_models(a, other_seeds, Seed{1, "m"}), ConfigError);
  AssociativeMemory fewer(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_only);
  fewer.insert(Prototype{kFist, v, 1});
  EXPECT_THROW(merge_models(a, fewer, Seed{1, "m"}), ConfigError);
  AssociativeMemory joint(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_effort);
  EXPECT_THROW(merge_models(a, joint, Seed{1, "m"}), ConfigError);
}

TEST(AddEffortClasses, TwentySevenClasses) {
  AssociativeMemory empty(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_only);
  std::vector<Prototype> protos;
  for (auto g : kAllGestures) {
    for (auto e : kAllEfforts) {
      protos.push_back(Prototype{ClassLabel{g, e},
                                 random_hypervector(derive(Seed{11, "p"}, "v", ClassLabel{g, e}.ordinal()), 256), 1});
    }
  }
  const auto am = add_effort_classes(empty, protos);
  EXPECT_EQ(am.size(), 27u);
  EXPECT_EQ(am.mode(), ModelMode::gesture_effort);

  const std::vector<Prototype> dup = {protos[4]};
  EXPECT_THROW(add_effort_classes(am, dup), ConfigError);
  const std::vector<Prototype> bare = {Prototype{kFist, protos[0].vector, 1}};
  EXPECT_THROW(add_effort_classes(empty, bare), ConfigError);
  AssociativeMemory gesture_only = two_class_model(protos[0].vector, protos[1].vector);
  EXPECT_THROW(add_effort_classes(gesture_only, dup), ConfigError);
}

TEST(AddEffortClasses, SingleEffortLevel) {
  AssociativeMemory empty(small_config(), ModelSeeds::from_root(1), ModelMode::gesture_effort);
  std::vector<Prototype> protos;
  for (auto g : kAllGestures) {
    protos.push_back(Prototype{ClassLabel{g, Effort::low},
                               random_hypervector(derive(Seed{12, "p"}, "v", static_cast<std::uint64_t>(g)), 256), 1});
  }
  const auto am = add_effort_classes(empty, protos);
  EXPECT_EQ(am.size(), 9u);
  for (const auto& p : am.prototypes()) EXPECT_EQ(p.label.effort, Effort::low);
}

TEST(ModelFile, RoundTrip) {
  const auto am = canonical_model();
  EXPECT_EQ(AssociativeMemory::from_bytes(am.to_bytes()), am);
  const auto path = std::filesystem::temp_directory_path() / "hdemg_test_roundtrip.hdam";
  am.save(path);
  EXPECT_EQ(AssociativeMemory::load(path), am);
  std::filesystem::remove(path);
  EXPECT_THROW(AssociativeMemory::load("/nonexistent/dir/model.hdam"), DataError);
}

TEST(ModelFile, LayoutDecodedByHand) {
  const auto b = canonical_model().to_bytes();
  ASSERT_EQ(b.size(), 172u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "HDAM");
  EXPECT_EQ(le(b, 4, 4), 1u);
  EXPECT_EQ(le(b, 8, 4), 128u);
  EXPECT_EQ(le(b, 12, 4), 4u);
  EXPECT_EQ(le(b, 16, 4), 2u);
  EXPECT_EQ(le(b, 20, 4), 3u);
  EXPECT_EQ(b[24], 1u);
  EXPECT_EQ(le(b, 25, 3), 0u);
  const auto seeds = ModelSeeds::from_root(7);
  EXPECT_EQ(le(b, 28, 8), seeds.item_memory.value);
  EXPECT_EQ(le(b, 36, 8), seeds.level_memory.value);
  EXPECT_EQ(le(b, 44, 8), seeds.tiebreak.value);
  EXPECT_EQ(le(b, 52, 4), 3u);
  double max1 = 0;
  const std::uint64_t bits = le(b, 56 + 24, 8);
  std::memcpy(&max1, &bits, 8);
  EXPECT_EQ(max1, 2.0);
  const std::size_t tie = 56 + 48;
  const auto tiebreak = random_hypervector(seeds.tiebreak, 128);
  EXPECT_EQ(le(b, tie, 8), tiebreak.words()[0]);
  EXPECT_EQ(le(b, tie + 16, 4), 2u);
  const std::size_t p0 = tie + 20;
  EXPECT_EQ(b[p0], static_cast<std::uint8_t>(Gesture::fist));
  EXPECT_EQ(b[p0 + 1], static_cast<std::uint8_t>(Effort::high));
  EXPECT_EQ(le(b, p0 + 4, 4), 3u);
  EXPECT_EQ(le(b, p0 + 8, 8), random_hypervector(Seed{1, "p"}, 128).words()[0]);
}

TEST(ModelFile, MatchesCanonicalVector) {
  const std::filesystem::path path = std::filesystem::path(HDEMG_TEST_DATA_DIR) / "canonical_model.hdam";
  const auto bytes = canonical_model().to_bytes();
  if (std::getenv("HDEMG_REGENERATE_CANONICAL") != nullptr) {
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                static_cast<std::streamsize>(bytes.size()));
  }
  std::ifstream in(path, std::ios::binary);
  ASSERT_TRUE(in) << "missing " << path;
  const std::vector<std::uint8_t> file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(file, bytes);
  EXPECT_EQ(AssociativeMemory::from_bytes(file), canonical_model());
}

TEST(ModelFile, RejectsCorruptInput) {
  auto b = canonical_model().to_bytes();
  auto bad = b;
  bad[0] = 'X';
  EXPECT_THROW(AssociativeMemory::from_bytes(bad), DataError);
  bad = b;
  bad[4] = 2;
  EXPECT_THROW(AssociativeMemory::from_bytes(bad), DataError);
  bad = b;
  bad.pop_back();
  EXPECT_THROW(AssociativeMemory::from_bytes(bad), DataError);
  bad = b;
  bad.push_back(0);
  EXPECT_THROW(AssociativeMemory::from_bytes(bad), DataError);
  bad = b;
  bad[24] = 7;
  EXPECT_THROW(AssociativeMemory::from_bytes(bad), DataError);
  bad = b;
  bad[124] = 40;  // gesture byte of the first prototype
  EXPECT_THROW(AssociativeMemory::from_bytes(bad), DataError);
}
