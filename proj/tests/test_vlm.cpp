// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include "seadapt/common.hpp"
#include "seadapt/embedding_cache.hpp"
#include "seadapt/embedding_provider.hpp"
#include "seadapt/prompt.hpp"
#include "test_support.hpp"

using namespace seadapt;

TEST_CASE("prompt rendering substitutes both slots") {
  PromptSpec spec;
  spec.template_text = "A photo of a {class} in {domain}";
  spec.class_name = "cargo ship";
  spec.domain_name = "foggy";
  CHECK(render_prompt(spec) == "A photo of a cargo ship in foggy");
}

TEST_CASE("prompt rendering tolerates absent slots but not empty values") {
  PromptSpec spec;
  spec.template_text = "A photo of a {class}";
  spec.class_name = "buoy";
  CHECK(render_prompt(spec) == "A photo of a buoy");

  PromptSpec missing;
  missing.template_text = "A photo of a {class} in {domain}";
  missing.class_name = "buoy";
  CHECK_THROWS_AS(render_prompt(missing), Error);

  PromptSpec unknown;
  unknown.template_text = "A {thing}";
  unknown.class_name = "x";
  CHECK_THROWS_AS(render_prompt(unknown), Error);
}

TEST_CASE("providers are frozen: identical input, identical output") {
  for (const std::string name : {"hash", "toy-frozen"}) {
    const auto p = make_provider(name, 32, 5);
    const auto a = p->embed_text("A photo of a boat in fog");
    const auto b = p->embed_text("A photo of a boat in fog");
    CHECK(a.values == b.values);
    CHECK(a.dim() == 32);
    CHECK(a.values.norm() == doctest::Approx(1.0).epsilon(1e-9));

    const auto c = p->embed_text("A photo of a ship in fog");
    CHECK(a.values != c.values);

    Rng rng(3);
    const Eigen::RowVectorXd px = test::random_matrix(1, 48, rng).cwiseAbs();
    const auto ia = p->embed_image(px, {4, 4, 3});
    const auto ib = p->embed_image(px, {4, 4, 3});
    CHECK(ia.values == ib.values);
    CHECK(ia.values.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("providers with different seeds disagree") {
  const auto a = make_provider("toy-frozen", 16, 1);
  const auto b = make_provider("toy-frozen", 16, 2);
  CHECK(a->embed_text("hello").values != b->embed_text("hello").values);
  CHECK(a->identity() != b->identity());
}

TEST_CASE("make_provider rejects unknown names") {
  CHECK_THROWS_AS(make_provider("clip", 16, 0), Error);
}

TEST_CASE("toy-frozen text embeddings cluster by shared words") {
  const auto p = make_provider("toy-frozen", 64, 17);
  const auto same_class_a = p->embed_text("A photo of a circle in sunny");
  const auto same_class_b = p->embed_text("A photo of a circle in foggy");
  const auto other_class = p->embed_text("A photo of a cross in rainstorm");
  const double within = same_class_a.values.dot(same_class_b.values);
  const double across = same_class_a.values.dot(other_class.values);
  CHECK(within > across);
}

TEST_CASE("image_embedding wrapper validates provider output") {
  const auto p = make_provider("hash", 8, 0);
  Rng rng(1);
  const Eigen::RowVectorXd px = test::random_matrix(1, 12, rng).cwiseAbs();
  const auto v = image_embedding(*p, px, {2, 2, 3});
  CHECK(v.dim() == 8);
  // Pixel count must match the declared dimensions.
  CHECK_THROWS_AS(image_embedding(*p, px, {3, 2, 3}), Error);
}

TEST_CASE("text table holds one vector per class and weather") {
  const auto p = make_provider("toy-frozen", 16, 9);
  std::vector<std::string> label_space;
  for (int i = 0; i < 15; ++i) label_space.push_back("class" + std::to_string(i));
  const std::vector<WeatherCondition> weathers(all_weather_conditions().begin(),
                                               all_weather_conditions().end());
  const auto table = text_embedding_table(*p, label_space, weathers,
                                          "A photo of a {class} in {domain}");
  CHECK(table.size() == 75);
  for (const auto& [key, v] : table) {
    CHECK(v.size() == 16);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("cache serves hits without touching the provider") {
  test::ScratchDir dir("cache-hits");
  const auto inner = make_provider("toy-frozen", 16, 4);
  CountingProvider counting(*inner);

  const std::vector<std::string> labels{"circle", "square"};
  const std::vector<WeatherCondition> weathers(all_weather_conditions().begin(),
                                               all_weather_conditions().end());
  const auto cache_file = dir / "emb.cache";
  {
    EmbeddingCache cache(cache_file, counting);
    text_embedding_table(counting, labels, weathers,
                         "A photo of a {class} in {domain}", &cache);
    cache.flush();
  }
  CHECK(counting.text_calls() == 10);

  {
    EmbeddingCache cache(cache_file, counting);
    CHECK(cache.size() == 10);
    const auto table = text_embedding_table(
        counting, labels, weathers, "A photo of a {class} in {domain}", &cache);
    CHECK(table.size() == 10);
  }
  // Second pass was served entirely from disk.
  CHECK(counting.text_calls() == 10);
}

TEST_CASE("cache written by another provider is discarded") {
  test::ScratchDir dir("cache-stale");
  const auto p16 = make_provider("toy-frozen", 16, 4);
  const auto cache_file = dir / "emb.cache";
  {
    EmbeddingCache cache(cache_file, *p16);
    cache.store("text:abc", p16->embed_text("abc").values);
    cache.flush();
  }
  const auto p32 = make_provider("toy-frozen", 32, 4);
  {
    EmbeddingCache cache(cache_file, *p32);
    CHECK(cache.size() == 0);
    CHECK_FALSE(cache.lookup("text:abc").has_value());
  }
}

TEST_CASE("cache round-trips vectors exactly") {
  test::ScratchDir dir("cache-exact");
  const auto p = make_provider("hash", 24, 8);
  const auto cache_file = dir / "emb.cache";
  const auto v = p->embed_text("some prompt");
  {
    EmbeddingCache cache(cache_file, *p);
    cache.store(EmbeddingCache::text_key("some prompt"), v.values);
    cache.flush();
  }
  {
    EmbeddingCache cache(cache_file, *p);
    const auto hit = cache.lookup(EmbeddingCache::text_key("some prompt"));
    REQUIRE(hit.has_value());
    CHECK(*hit == v.values);
  }
}
