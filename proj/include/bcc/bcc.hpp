#ifndef BCC_BCC_HPP
#define BCC_BCC_HPP

// Umbrella header for the consensus-clustering library.

#include "bcc/alignment.hpp"
#include "bcc/baselines.hpp"
#include "bcc/chain.hpp"
#include "bcc/csv.hpp"
#include "bcc/dataset.hpp"
#include "bcc/errors.hpp"
#include "bcc/io.hpp"
#include "bcc/kmeans.hpp"
#include "bcc/marginals.hpp"
#include "bcc/matrix.hpp"
#include "bcc/model.hpp"
#include "bcc/normal_gamma.hpp"
#include "bcc/rng.hpp"
#include "bcc/simulation.hpp"
#include "bcc/special.hpp"
#include "bcc/summary.hpp"

#endif
