#pragma once

#include <string>

#include <json.hpp>

#include "lorag/generator.hpp"
#include "lorag/loop.hpp"
#include "lorag/metrics.hpp"
#include "lorag/retrieval.hpp"

namespace lorag {

using ojson = nlohmann::ordered_json;

ojson to_json(const GenerationResult& result);
GenerationResult generation_from_json(const ojson& j);

/// Array of {doc_id, score, sentence_indexes}.
ojson to_json(const RetrievedContext& context);

/// {query, initial, initial_context, iterations: [{t, output, context,
/// distance}], stop_reason, final}.
ojson to_json(const LoopTranscript& transcript);

/// MetricsReport fields plus excluded_from_ppl; absent perplexity is null.
ojson to_json(const MetricsReport& report);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace lorag
