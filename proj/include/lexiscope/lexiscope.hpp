#pragma once

#include "lexiscope/corpus.hpp"
#include "lexiscope/dataset.hpp"
#include "lexiscope/dataset_io.hpp"
#include "lexiscope/digest.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/eval.hpp"
#include "lexiscope/features.hpp"
#include "lexiscope/image.hpp"
#include "lexiscope/lxfv.hpp"
#include "lexiscope/numerics.hpp"
#include "lexiscope/parallel.hpp"
#include "lexiscope/ranker.hpp"
#include "lexiscope/similarity.hpp"
#include "lexiscope/synth.hpp"
#include "lexiscope/text.hpp"
