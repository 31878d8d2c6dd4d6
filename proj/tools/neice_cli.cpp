#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>

#include "neice/pipeline.hpp"

namespace {

using neice::PipelineConfig;

// Shared --config/--set handling: load the config file if given, then apply
// key=value overrides in order.
struct ConfigArgs {
    std::string config_path;
    std::vector<std::string> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "key = value config file");
        cmd->add_option("-s,--set", overrides, "override, e.g. --set alpha_word=0.3");
    }

    PipelineConfig resolve() const {
        PipelineConfig config;
        if (!config_path.empty()) config = PipelineConfig::load(config_path);
        for (const auto& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw neice::ConfigError("override must be key=value: " + kv);
            config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        return config;
    }
};

neice::StageCache prepared(const PipelineConfig& config) {
    neice::StageCache cache;
    cache.prepare(config);
    return cache;
}

void print_stats(const PipelineConfig& config) {
    auto cache = prepared(config);
    auto stats = neice::dataset_stats(cache.corpus());
    const auto& rep = cache.ingest_report();
    nlohmann::json j{{"n_docs", stats.n_docs},
                     {"vocab_size", stats.vocab_size},
                     {"ne_mentions", stats.ne_mentions},
                     {"docs_with_ne", stats.docs_with_ne},
                     {"mean_title_words", stats.mean_title_words},
                     {"mean_description_words", stats.mean_description_words},
                     {"ingest",
                      {{"docs_read", rep.docs_read},
                       {"docs_kept", rep.docs_kept},
                       {"dropped_short", rep.dropped_short},
                       {"dropped_empty", rep.dropped_empty},
                       {"dropped_duplicate", rep.dropped_duplicate},
                       {"unknown_doc_warnings", rep.unknown_doc_warnings},
                       {"annotations_read", rep.annotations_read},
                       {"annotations_accepted", rep.annotations_accepted}}}};
    std::cout << j.dump(2) << '\n';
}

void do_ingest(const PipelineConfig& config) {
    auto cache = prepared(config);
    std::filesystem::create_directories(config.output_dir);
    const auto& corpus = cache.corpus();
    std::ofstream vf(config.output_dir + "/vocabulary.txt");
    for (const auto& term : corpus.vocab.terms()) vf << term << '\n';
    std::ofstream ef(config.output_dir + "/entities.jsonl");
    for (int d = 0; d < corpus.n_docs(); ++d)
        ef << nlohmann::json{{"id", corpus.doc_ids[static_cast<std::size_t>(d)]},
                             {"entities", corpus.doc_entities[static_cast<std::size_t>(d)]}}
                  .dump()
           << '\n';
    neice::dump_triplets(corpus.bow, config.output_dir + "/bow.triplets");
    std::cerr << "ingested " << corpus.n_docs() << " documents, vocabulary "
              << corpus.vocab.size() << " -> " << config.output_dir << '\n';
}

void do_represent(const PipelineConfig& config) {
    auto cache = prepared(config);
    const auto& corpus = cache.corpus();
    neice::WeightedDocTermMatrix repr;
    switch (config.representation) {
        case neice::ReprKind::tfidf:
            repr = neice::tf_idf(corpus.bow);
            break;
        case neice::ReprKind::cluwords:
            repr = neice::cluwords(corpus.bow, cache.similarity(config.alpha_word));
            break;
        case neice::ReprKind::neice:
            repr = neice::neice_matrix(corpus.bow, cache.similarity(config.alpha_word),
                                       corpus.doc_entities,
                                       cache.entity_related(config.alpha_ent),
                                       config.alpha_ent);
            break;
    }
    std::filesystem::create_directories(config.output_dir);
    const std::string path =
        config.output_dir + "/" + neice::to_string(config.representation) + ".triplets";
    neice::dump_triplets(repr.m, path);
    std::cerr << "wrote " << path << " (" << repr.m.nonZeros() << " nonzeros)\n";
}

// Score an existing tab-separated topic-list file against the reference.
void do_score(const PipelineConfig& config, const std::string& topics_path) {
    std::ifstream in(topics_path);
    if (!in) throw neice::DataError("cannot open topics file: " + topics_path);
    std::vector<neice::TopicSummary> summaries;
    std::string line;
    while (std::getline(in, line)) {
        neice::TopicSummary s;
        s.topic_id = static_cast<int>(summaries.size());
        std::string term;
        for (std::istringstream ls(line); std::getline(ls, term, '\t');)
            if (!term.empty()) s.top_terms.emplace_back(term, 0.0);
        if (!s.top_terms.empty()) summaries.push_back(std::move(s));
    }
    if (summaries.empty()) throw neice::DataError("topics file is empty: " + topics_path);

    auto cache = prepared(config);
    neice::WordSet filter;
    for (const auto& s : summaries)
        for (const auto& [term, weight] : s.top_terms) filter.insert(term);
    auto index = neice::build_index(cache.reference_docs(), config.window_size, &filter);
    auto report = neice::score_model(index, summaries);
    std::filesystem::create_directories(config.output_dir);
    neice::save_report_json(report, config.output_dir + "/coherence.json");
    std::cout << "mean_cv=" << report.mean_cv << '\n';
}

void do_synth(const PipelineConfig& config, const neice::SynthOptions& opts) {
    auto out = neice::generate_synthetic(opts);
    out.write(config.output_dir);
    std::cerr << "wrote synthetic corpus (" << out.documents.size() << " docs, "
              << opts.n_topics << " planted topics) -> " << config.output_dir << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Short-text topic modeling with entity-informed CluWords representations"};
    app.require_subcommand(1);

    ConfigArgs args;
    neice::SynthOptions synth_opts;

    auto* ingest = app.add_subcommand("ingest", "parse corpus + annotations, write vocab/bow");
    auto* stats = app.add_subcommand("stats", "print dataset statistics as JSON");
    auto* represent = app.add_subcommand("represent", "build the weighted doc-term matrix");
    auto* factorize =
        app.add_subcommand("factorize", "run the pipeline without coherence scoring");
    auto* score = app.add_subcommand("score", "score a topic-list file against the reference");
    std::string topics_path;
    score->add_option("--topics", topics_path, "tab-separated topic list file")->required();
    auto* run = app.add_subcommand("run", "full pipeline: ingest -> nmf -> coherence");
    auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep over (alpha_word, alpha_ent)");
    auto* synth = app.add_subcommand("synth", "generate a planted-topic synthetic corpus");
    auto* config_cmd = app.add_subcommand("config", "config utilities");
    auto* config_show = config_cmd->add_subcommand("show", "print the effective configuration");

    for (auto* cmd : {ingest, stats, represent, factorize, score, run, sweep_cmd, synth,
                      config_show})
        args.attach(cmd);

    synth->add_option("--topics", synth_opts.n_topics, "planted topic count");
    synth->add_option("--docs", synth_opts.n_docs, "document count");
    synth->add_option("--terms-per-topic", synth_opts.terms_per_topic, "block vocabulary size");
    synth->add_option("--doc-len", synth_opts.doc_len, "tokens per document");
    synth->add_option("--shared-terms", synth_opts.shared_terms, "ambiguous pool size");
    synth->add_option("--ambiguous-rate", synth_opts.ambiguous_rate,
                      "per-token ambiguous draw probability");
    synth->add_flag("--entities", synth_opts.with_entities, "inject entity mentions");
    synth->add_option("--synth-seed", synth_opts.seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        PipelineConfig config = args.resolve();
        if (*stats) {
            print_stats(config);
        } else if (*ingest) {
            do_ingest(config);
        } else if (*represent) {
            do_represent(config);
        } else if (*factorize || *run) {
            config.validate();
            neice::StageCache cache;
            auto record = neice::run_point(config, cache, config.alpha_word, config.alpha_ent,
                                           config.output_dir, /*with_scoring=*/!*factorize);
            for (const auto& [k, report] : record.coherence_by_k)
                std::cout << "K=" << k << " mean_cv=" << report.mean_cv << '\n';
            std::cerr << "outputs in " << record.output_dir << '\n';
        } else if (*score) {
            do_score(config, topics_path);
        } else if (*sweep_cmd) {
            auto records = neice::sweep(config);
            int failed = 0;
            for (const auto& r : records)
                if (r.failed) ++failed;
            std::cerr << records.size() << " grid points (" << failed << " failed), table in "
                      << config.output_dir << "/sweep_table.tsv\n";
        } else if (*synth) {
            do_synth(config, synth_opts);
        } else if (*config_show) {
            std::cout << config.to_json().dump(2) << '\n';
        }
    } catch (const neice::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const neice::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const neice::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
