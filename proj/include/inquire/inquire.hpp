#pragma once

#include "inquire/agents.hpp"
#include "inquire/belief.hpp"
#include "inquire/case.hpp"
#include "inquire/chapter.hpp"
#include "inquire/dialogue.hpp"
#include "inquire/error.hpp"
#include "inquire/experiment.hpp"
#include "inquire/icd.hpp"
#include "inquire/inquiry.hpp"
#include "inquire/metrics.hpp"
#include "inquire/prompts.hpp"
#include "inquire/provider.hpp"
#include "inquire/selector.hpp"
#include "inquire/session.hpp"
#include "inquire/synthetic.hpp"
#include "inquire/text.hpp"
#include "inquire/transcript.hpp"
