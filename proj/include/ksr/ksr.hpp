#pragma once

#include "ksr/audio.hpp"
#include "ksr/binio.hpp"
#include "ksr/cli.hpp"
#include "ksr/dsp.hpp"
#include "ksr/error.hpp"
#include "ksr/eval.hpp"
#include "ksr/features.hpp"
#include "ksr/filterbank.hpp"
#include "ksr/gmm.hpp"
#include "ksr/harness.hpp"
#include "ksr/manifest.hpp"
#include "ksr/rng.hpp"
#include "ksr/sad.hpp"
#include "ksr/segments.hpp"
#include "ksr/svm.hpp"
#include "ksr/synth.hpp"
#include "ksr/threading.hpp"
#include "ksr/wav.hpp"
