#pragma once

#include <string>

#include "negbound/embedding.hpp"

namespace negbound {

enum class EmbeddingFormat { tsv, packed };

EmbeddingFormat format_from_string(const std::string& name);

/// TSV layout: header line
///   #negbound-embeddings v1 n=<N> h=<h> c=<|C|> normalized=<0|1>
/// then one `label<TAB>v0<TAB>...<TAB>v{h-1}` row per sample, reals printed
/// with 9 significant digits (lossless for float storage).
///
/// Packed layout: 16-byte magic "NEGBOUNDEMBED\0v1", little-endian u32 N,
/// u32 h, u32 |C|, u8 normalized flag, N u32 labels, N*h little-endian f32
/// features row-major.
void save_embeddings(const EmbeddingSet& set, const std::string& path, EmbeddingFormat format);

EmbeddingSet load_embeddings(const std::string& path, EmbeddingFormat format);

/// Infer the format from the file's leading bytes.
EmbeddingSet load_embeddings_auto(const std::string& path);

}  // namespace negbound
