#ifndef GRAPHPARSE_TESTS_FIXTURES_HPP_
#define GRAPHPARSE_TESTS_FIXTURES_HPP_

#include <vector>

#include "graphparse/dataset.hpp"
#include "graphparse/model.hpp"
#include "graphparse/rng.hpp"
#include "graphparse/trainer.hpp"

namespace fixtures {

inline const std::vector<graphparse::Example>& corpus() {
  static const auto c = [] {
    auto v = graphparse::generate(graphparse::GrammarConfig::defaults(), 300, 42);
    v.push_back({"did M0 direct M1 ?", "ASK WHERE { M0 direct M1 }", {"did_e_v_e", "vb:direct"}});
    return v;
  }();
  return c;
}

inline graphparse::ModelAssets assets(graphparse::Mode mode, std::size_t d, std::size_t n_vars = 4) {
  graphparse::ModelConfig cfg;
  cfg.mode = mode;
  cfg.d = d;
  cfg.n_vars = n_vars;
  return graphparse::build_assets(corpus(), cfg, graphparse::grammar_lexicon(graphparse::GrammarConfig::defaults()));
}

template <typename T>
graphparse::Model<T> model(graphparse::Mode mode, std::size_t d, std::uint64_t seed = 1) {
  graphparse::Model<T> m(assets(mode, d));
  graphparse::Rng rng(seed);
  m.initialize(rng);
  return m;
}

}  // namespace fixtures

#endif  // GRAPHPARSE_TESTS_FIXTURES_HPP_
