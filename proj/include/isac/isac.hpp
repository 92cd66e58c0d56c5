#pragma once

#include "isac/af.hpp"
#include "isac/bench.hpp"
#include "isac/bounds.hpp"
#include "isac/cc_long.hpp"
#include "isac/channel.hpp"
#include "isac/core.hpp"
#include "isac/fft.hpp"
#include "isac/random.hpp"
#include "isac/rd_short.hpp"
#include "isac/seqcode.hpp"
#include "isac/waveform.hpp"
#include "isac/zoom.hpp"
