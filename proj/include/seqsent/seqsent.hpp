#ifndef SEQSENT_SEQSENT_HPP
#define SEQSENT_SEQSENT_HPP

#include "seqsent/chain.hpp"
#include "seqsent/checkpoint.hpp"
#include "seqsent/corpus.hpp"
#include "seqsent/dropout.hpp"
#include "seqsent/embed.hpp"
#include "seqsent/encoder.hpp"
#include "seqsent/errors.hpp"
#include "seqsent/eval.hpp"
#include "seqsent/lr_baseline.hpp"
#include "seqsent/model.hpp"
#include "seqsent/numkit.hpp"
#include "seqsent/train.hpp"

#endif  // SEQSENT_SEQSENT_HPP
