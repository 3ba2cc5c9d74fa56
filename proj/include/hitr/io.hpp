#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hitr/corpus.hpp"
#include "hitr/evalkit.hpp"
#include "hitr/lda.hpp"
#include "hitr/pipeline.hpp"

namespace hitr::io {

// Paths ending in .gz are read and written gzip-compressed; everything else
// is plain bytes. Compression is deterministic (fixed level, zero mtime).
bool is_gzip_path(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::uint32_t crc32_of(const std::string& bytes);
// Checksum of the file as stored on disk (compressed bytes for .gz).
std::uint32_t crc32_file(const std::string& path);

// Rounds through a 12-significant-digit decimal representation. Applied to
// every probability before model serialization so that saved models are
// stable across platforms.
double round_probability(double p);

// Shortest decimal that parses back to exactly the same double.
std::string format_double(double v);

// Corpus JSON: {format, version, vocab: [token...],
//               docs: [{id, counts: [[wid,count]...], group?, label?}...]}.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

// Model JSON: {format, version, config, provenance, vocab_ref: [token...],
//              doc_ids, phi: [[[wid,p]...]...], theta: [[[tid,p]...]...]}.
void save_model(const TopicModel& model, const std::string& path);
TopicModel load_model(const std::string& path);

void write_scores_csv(const std::string& path,
                      const std::vector<std::string>& doc_ids,
                      const std::vector<double>& scores);
void write_roc_csv(const std::string& path, const RocResult& roc);
void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<double, double>>& rows);
void write_coherence_csv(const std::string& path,
                         const CoherenceReport& report);
void write_features_csv(const std::string& path,
                        const DocumentTopicMatrix& theta,
                        const std::vector<std::string>& labels,
                        std::uint32_t num_topics);
void write_distance_csv(const std::string& path,
                        const std::vector<std::vector<double>>& matrix);

// One manifest per CLI run, written next to the primary output as
// <output>.manifest.json. Records enough to reproduce the run and to check
// the outputs it produced.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // checksummed at write time
  std::uint64_t seed = 0;
  double wall_clock_ms = 0.0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace hitr::io
