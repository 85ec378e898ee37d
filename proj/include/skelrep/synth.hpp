#pragma once

#include <cstdint>
#include <vector>

#include "skelrep/skeleton.hpp"

namespace skelrep {

// Procedural stand-in corpus: parametric motion families per class with
// per-sequence nuisance variation (phase, frequency, amplitude, heading,
// height, sensor noise), emitted as global 3-D joints for the normalization
// pipeline.
struct SyntheticSpec {
    int num_classes = 3;          // families cycle through coupling/posture tables
    int sequences_per_class = 100;
    int frames_per_sequence = 120;
    float fps = 30.0f;
    double noise_level = 0.01;    // stddev of additive joint noise, metres
    double frequency_min = 0.8;   // Hz
    double frequency_max = 2.0;
    double posture_scale = 0.5;   // magnitude of the class-held posture offset, metres

    void validate() const;
};

std::vector<SkeletonSequence> synth_generate(const SyntheticSpec& spec, uint64_t seed);

// The canonical standing pose the generator perturbs (metres, z up).
SkeletonFrame synth_base_pose();

}  // namespace skelrep
