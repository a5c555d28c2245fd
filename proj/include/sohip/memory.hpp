#pragma once

#include <cstdint>

#include "sohip/nn.hpp"
#include "sohip/tensor.hpp"

namespace sohip {

// The five gating units. g_short scores batch summaries (m -> m); the
// consolidation gates and the fusion gate read concatenated memory pairs
// (2m -> m). Every gate activation passes through the sigmoid.
struct GateBank {
  LinearLayer g_short;
  LinearLayer g_in;
  LinearLayer g_f;
  LinearLayer g_o;
  LinearLayer g_fuse;

  std::size_t mem_dim() const { return g_short.out_dim(); }
};

GateBank init_gate_bank(Rng& rng, std::size_t mem_dim);

struct MemoryState {
  Vector short_term;  // overwritten every batch
  Vector long_term;   // consolidated across batches and rounds

  explicit MemoryState(std::size_t mem_dim = 0)
      : short_term(mem_dim), long_term(mem_dim) {}
};

struct CollectiveMemory {
  Vector vec;
  std::uint32_t round = 0;

  explicit CollectiveMemory(std::size_t mem_dim = 0) : vec(mem_dim) {}
};

// --- short-term abstraction -------------------------------------------------
// batch representations -> encoded batch mean -> importance-gated summary

struct ShortTermCache {
  Matrix z;          // B x d, encoder input
  Matrix z_enc;      // B x m
  Vector z_mean;     // m
  Vector gate;       // sigmoid output; empty when the gate is bypassed
  bool gated = true;
};

struct ShortTermResult {
  Vector memory;  // m
  ShortTermCache cache;
};

// use_importance_gate=false bypasses the gate (memory = batch mean).
ShortTermResult abstract_short_term(const LinearLayer& encoder,
                                    const GateBank& gates, const Matrix& z,
                                    bool use_importance_gate = true);

// Accumulates encoder and g_short gradients; returns dL/dZ for the
// extractor path.
Matrix abstract_short_term_backward(LinearLayer& encoder, GateBank& gates,
                                    const ShortTermCache& cache,
                                    const Vector& d_memory);

// --- consolidation ------------------------------------------------------------
// input/forget/output gates merge the fresh short-term memory with the
// carried long-term memory; the previous long-term memory is state from an
// earlier step and is not differentiated through.

struct ConsolidateCache {
  Vector short_term;
  Vector long_term_prev;
  Vector joint;  // [short; long_prev]
  Vector gate_in, gate_f, gate_o;
};

struct ConsolidateResult {
  Vector memory;  // new long-term memory
  ConsolidateCache cache;
};

ConsolidateResult consolidate(const GateBank& gates, const Vector& short_term,
                              const Vector& long_term_prev);

// Returns dL/d(short_term); gate gradients accumulate into the bank.
Vector consolidate_backward(GateBank& gates, const ConsolidateCache& cache,
                            const Vector& d_memory);

// --- fusion and residual enhancement -----------------------------------------
// gated absorption of the collective memory, decode to feature space, and a
// row-broadcast residual onto the batch representations. The collective
// vector comes from the server and is treated as a constant.

struct FuseCache {
  Vector long_term;
  Vector collective;
  Vector joint;        // [long; collective]; empty when fusion is bypassed
  Vector gate;         // sigmoid output; empty when fusion is bypassed
  Vector complete;     // fused memory fed to the decoder
  bool used_collective = true;
};

struct FuseResult {
  Matrix enhanced;   // B x d, z + Expand(decoded)
  Vector complete;   // m
  FuseCache cache;
};

// use_collective=false drops the collective term (complete = long_term).
FuseResult fuse_and_enhance(const GateBank& gates, const LinearLayer& decoder,
                            const Vector& long_term, const Vector& collective,
                            const Matrix& z, bool use_collective = true);

// Accumulates decoder and g_fuse gradients; returns dL/d(long_term). The
// residual gradient to Z is d_enhanced itself, so the caller reuses it.
Vector fuse_and_enhance_backward(LinearLayer& decoder, GateBank& gates,
                                 const FuseCache& cache,
                                 const Matrix& d_enhanced);

}  // namespace sohip
