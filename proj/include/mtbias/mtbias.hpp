#pragma once

#include "mtbias/attribution.hpp"
#include "mtbias/client.hpp"
#include "mtbias/corpus.hpp"
#include "mtbias/debias.hpp"
#include "mtbias/digest.hpp"
#include "mtbias/error.hpp"
#include "mtbias/gnt.hpp"
#include "mtbias/integrated_gradients.hpp"
#include "mtbias/lexicon.hpp"
#include "mtbias/metrics.hpp"
#include "mtbias/prompt.hpp"
#include "mtbias/records_io.hpp"
#include "mtbias/report.hpp"
#include "mtbias/rng.hpp"
#include "mtbias/stats.hpp"
#include "mtbias/tensor_io.hpp"
#include "mtbias/text.hpp"
