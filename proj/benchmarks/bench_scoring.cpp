// Throughput of the hot paths: lexicon matching, the HONEST series and
// centroid agreement at realistic sizes (hundreds of templates, K = 100).

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "fairbelief/dump.hpp"
#include "fairbelief/lexicon.hpp"
#include "fairbelief/scoring.hpp"
#include "fairbelief/similarity.hpp"

namespace fb = fairbelief;

namespace {

std::vector<std::string> vocabulary(std::size_t n) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back("word" + std::to_string(i));
  return words;
}

fb::Lexicon lexicon(const std::vector<std::string>& words) {
  fb::Lexicon lex;
  for (std::size_t i = 0; i < words.size(); i += 7) lex.add(words[i], "x");
  return lex;
}

fb::CompletionDump dump(const std::vector<std::string>& words, std::size_t templates,
                        std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  fb::CompletionDump d;
  d.model.model_id = "bench-" + std::to_string(seed);
  d.model.family = "bench";
  d.k_max = k;
  d.template_manifest_hash = "h";
  for (std::size_t t = 0; t < templates; ++t) {
    fb::TemplateCompletions block{"t" + std::to_string(t), {}};
    for (std::size_t r = 0; r < k; ++r) {
      block.ranked.push_back({words[rng() % words.size()], -static_cast<double>(r + 1)});
    }
    d.templates.push_back(std::move(block));
  }
  return d;
}

void BM_IsHurtful(benchmark::State& state) {
  const auto words = vocabulary(500);
  const auto lex = lexicon(words);
  const std::vector<std::string> inputs = {"Word14.", "a word21", "the quick word3 fox", "WORD499"};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fb::is_hurtful(lex, inputs[i++ % inputs.size()]));
  }
}
BENCHMARK(BM_IsHurtful);

void BM_HonestSeries(benchmark::State& state) {
  const auto words = vocabulary(2000);
  const auto lex = lexicon(words);
  const auto d = dump(words, static_cast<std::size_t>(state.range(0)), 100, 1);
  const fb::DumpView view(d);
  for (auto _ : state) benchmark::DoNotOptimize(fb::honest_series(view, lex, 100));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.record_count()));
}
BENCHMARK(BM_HonestSeries)->Arg(100)->Arg(1000);

void BM_PairAgreement(benchmark::State& state) {
  const auto words = vocabulary(2000);
  const std::size_t dim = 384;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  fb::EmbeddingTable table(dim, "bench");
  for (const auto& w : words) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    table.insert(w, std::move(v));
  }
  const auto a = dump(words, static_cast<std::size_t>(state.range(0)), 100, 1);
  const auto b = dump(words, static_cast<std::size_t>(state.range(0)), 100, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fb::pair_agreement(fb::DumpView(a), fb::DumpView(b), table, 100));
  }
}
BENCHMARK(BM_PairAgreement)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
