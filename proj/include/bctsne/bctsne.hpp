#ifndef BCTSNE_BCTSNE_HPP
#define BCTSNE_BCTSNE_HPP

/**
 * @file bctsne.hpp
 *
 * @brief Umbrella header for batch-corrected t-SNE.
 */

#include "matrix.hpp"
#include "parallel.hpp"
#include "linalg.hpp"
#include "labels.hpp"
#include "design.hpp"
#include "reduce.hpp"
#include "tsne.hpp"
#include "projection.hpp"
#include "run.hpp"
#include "metrics.hpp"
#include "synthgen.hpp"
#include "io.hpp"
#include "plot.hpp"
#include "pipeline.hpp"

#endif
