"""Query template banks, value pools and filler sentences for the generator.

Each query type has a bank of templates. ``cue`` names the signal flag the
filled template is guaranteed to raise; ``None`` marks implicit phrasings
that carry no semantic cue (the hybrid router must fall back on them).
Value pools and filler are kept disjoint so an answer string never shows up
in a store by accident.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Optional

from .core import QueryType, StoreId

_S = StoreId


@dataclass(frozen=True)
class Template:
    text: str
    cue: Optional[str] = None


@dataclass
class Scenario:
    """One instantiated query: slot values, answer, planted and distractor passages."""

    slots: dict[str, str]
    answer: str
    answers: list[tuple[StoreId, str]]
    distractors: list[tuple[StoreId, str]]
    slot_name: str = ""
    historical_value: Optional[str] = None


FIRST_NAMES = (
    "Alex", "Jordan", "Priya", "Mateo", "Hana", "Omar", "Lena", "Tomas",
    "Grace", "Kenji", "Sofia", "Ravi", "Nadia", "Elena", "Marcus", "Yara",
)
LAST_NAMES = (
    "Chen", "Williams", "Torres", "Okafor", "Novak", "Silva", "Haddad",
    "Lindqvist", "Moreau", "Tanaka", "Kowalski", "Reyes", "Fischer", "Mensah",
)
COMPANIES = (
    "TechCorp", "Northwind", "Globex", "Initech", "Umbrella Labs", "Vandelay Industries",
    "Stark Analytics", "Acme Robotics", "Blue Harbor", "Pinecrest Health",
)
CITIES = (
    "Portland", "Austin", "Denver", "Lisbon", "Toronto", "Osaka", "Nairobi",
    "Melbourne", "Valencia", "Helsinki",
)
GYMS = ("Iron Temple", "Peak Fitness", "Harbor Athletic Club", "Summit Climbing", "Riverside YMCA")
ROLES = (
    "Senior Software Engineer", "Product Manager", "Data Analyst",
    "UX Designer", "Account Executive", "Research Scientist",
)
PROJECTS = ("Atlas", "Orion", "Beacon", "Nimbus", "Keystone", "Meridian", "Halcyon", "Sequoia")
EVENTS = (
    "meeting", "dentist appointment", "team standup", "lunch", "client call",
    "yoga class", "design review", "parent-teacher conference",
)
EVENT_WITH = ("the marketing team", "the finance group", "a recruiter", "two vendors", "the new intern")
TOPICS = (
    "a kayak trip to Lake Tahoe", "the Python course on Coursera", "renovating the kitchen",
    "adopting a rescue greyhound", "training for a half marathon", "learning Portuguese",
    "the budget for a new laptop", "a surprise party for Mia", "switching to a standing desk",
    "a road trip along the Oregon coast",
)
COLLECTIONS = {
    "books": ("book", ("Dune", "Neuromancer", "Hyperion", "Middlemarch", "Solaris", "Piranesi")),
    "restaurants": ("restaurant", ("Nopa", "Zuni Cafe", "Tartine", "Kin Khao", "State Bird", "Lers Ros")),
    "movies": ("movie", ("Arrival", "Heat", "Amelie", "Parasite", "Alien", "Paterson")),
    "hobbies": ("hobby", ("pottery", "bouldering", "chess", "birdwatching", "sourdough baking", "origami")),
}
WHEN = ("two weeks ago", "last month", "in the spring", "three sessions ago", "a while back", "last quarter")


def _name(rng: random.Random) -> str:
    return f"{rng.choice(FIRST_NAMES)} {rng.choice(LAST_NAMES)}"


def _phone(rng: random.Random) -> str:
    return f"555-{rng.randint(100, 999)}-{rng.randint(1000, 9999)}"


def _email(rng: random.Random) -> str:
    first, last = rng.choice(FIRST_NAMES), rng.choice(LAST_NAMES)
    domain = rng.choice(COMPANIES).lower().replace(" ", "")
    return f"{first.lower()}.{last.lower()}@{domain}.com"


def _two_distinct(rng: random.Random, draw: Callable[[random.Random], str]) -> tuple[str, str]:
    first = draw(rng)
    while True:
        second = draw(rng)
        if second != first:
            return first, second


# attribute -> (value draw, summary line, stale-fact line)
PROFILE_ATTRIBUTES: dict[str, tuple[Callable[[random.Random], str], str, str]] = {
    "phone number": (_phone, "Contact: Phone number is {v}.", "User's phone number was {v} at the time."),
    "email address": (_email, "Contact: Email is {v}.", "User gave {v} as their email back then."),
    "manager": (_name, "Manager: {v}.", "User reported to {v} at work."),
    "employer": (lambda r: r.choice(COMPANIES), "User Profile: Works at {v}.", "User was employed at {v}."),
    "home city": (lambda r: r.choice(CITIES), "User Profile: Lives in {v}.", "User was living in {v}."),
    "dentist": (_name, "Health: Dentist is Dr. {v}.", "User saw Dr. {v} for dental checkups."),
}
UPDATE_ATTRIBUTES = ("manager", "employer", "home city", "gym")

# metric -> (old value draw, life change)
METRICS: dict[str, tuple[Callable[[random.Random], str], str]] = {
    "weight": (lambda r: f"{r.randint(150, 230)} lbs", "the diet"),
    "rent": (lambda r: f"${r.randint(9, 30) * 100:,} a month", "the relocation"),
    "commute time": (lambda r: f"{r.randint(4, 15) * 5} minutes", "the new job"),
    "resting heart rate": (lambda r: f"{r.randint(55, 90)} bpm", "the training plan"),
    "running pace": (lambda r: f"{r.randint(8, 12)}:{r.choice(('05', '20', '35', '50'))} per mile", "the marathon program"),
}


def _session(rng: random.Random) -> int:
    return rng.randint(1, 40)


def _time(rng: random.Random) -> str:
    return f"{rng.randint(1, 11)}:{rng.choice(('00', '15', '30', '45'))}{rng.choice(('am', 'pm'))}"


# -- scenarios per query type -------------------------------------------------


def _single_hop(rng: random.Random, distract: bool) -> Scenario:
    attr = rng.choice(sorted(PROFILE_ATTRIBUTES))
    draw, summary_line, stale_line = PROFILE_ATTRIBUTES[attr]
    current, old = _two_distinct(rng, draw)
    sc = Scenario(
        slots={"attr": attr},
        answer=current,
        answers=[(_S.SUMMARY, summary_line.format(v=current))],
        distractors=[],
        slot_name=attr,
    )
    if distract:
        sc.historical_value = old
        line = f"Session {_session(rng)} ({rng.choice(WHEN)}): " + stale_line.format(v=old)
        sc.distractors.append((_S.LTM, line))
    return sc


def _single_session(rng: random.Random, distract: bool) -> Scenario:
    event, when = rng.choice(EVENTS), _time(rng)
    line = f"User just mentioned they have a {event} at {when} today with {rng.choice(EVENT_WITH)}."
    return Scenario({"event": event}, when, [(_S.STM, line)], [])


def _recent_session(rng: random.Random, distract: bool) -> Scenario:
    topic = rng.choice(TOPICS)
    line = f"Session {_session(rng)} (last week): User talked at length about {topic}."
    return Scenario({}, topic, [(_S.LTM, line)], [])


def _multi_hop(rng: random.Random, distract: bool) -> Scenario:
    company, project = rng.choice(COMPANIES), rng.choice(PROJECTS)
    return Scenario(
        {"project": project},
        company,
        [
            (_S.SUMMARY, f"User Profile: Works at {company} as {rng.choice(ROLES)}."),
            (_S.LTM, f"Session {_session(rng)} (last month): User discussed the {project} project run by {company}."),
        ],
        [],
    )


def _memory_capacity(rng: random.Random, distract: bool) -> Scenario:
    plural = rng.choice(sorted(COLLECTIONS))
    singular, pool = COLLECTIONS[plural]
    picks = rng.sample(pool, 3)
    listing = f"{picks[0]}, {picks[1]} and {picks[2]}"
    k = _session(rng)
    return Scenario(
        {"category": plural, "singular": singular},
        listing,
        [
            (_S.LTM, f"Session {k} ({rng.choice(WHEN)}): User mentioned the {plural} {listing}."),
            (_S.EPISODIC, f"Session {k}, Turn {rng.randint(1, 12)}: User said 'Lately it has been {listing} for me.'"),
        ],
        [],
    )


def _temporal(rng: random.Random, distract: bool) -> Scenario:
    metric = rng.choice(sorted(METRICS))
    draw, change = METRICS[metric]
    old = draw(rng)
    k = _session(rng)
    return Scenario(
        {"metric": metric, "change": change},
        old,
        [
            (_S.LTM, f"Session {k} (last week): User mentioned their {metric} was {old} before starting {change}."),
            (
                _S.EPISODIC,
                f"Session {k}, Turn {rng.randint(1, 12)}: User said 'Back in January my {metric} was {old}, "
                f"and {change} was about to begin.'",
            ),
        ],
        [],
        slot_name=metric,
    )


def _knowledge_update(rng: random.Random, distract: bool) -> Scenario:
    attr = rng.choice(UPDATE_ATTRIBUTES)
    draw = {
        "manager": _name,
        "employer": lambda r: r.choice(COMPANIES),
        "home city": lambda r: r.choice(CITIES),
        "gym": lambda r: r.choice(GYMS),
    }[attr]
    current, old = _two_distinct(rng, draw)
    if attr == "manager":
        summary = f"Manager: {current}."
        history = f"Before the recent reorg, user's manager was {old}. Now reports to {current}."
    else:
        summary = f"User Profile: {attr.capitalize()} is {current}."
        history = f"Before the recent change, user's {attr} was {old}. Now it is {current}."
    sc = Scenario(
        {"attr": attr},
        current,
        [
            (_S.SUMMARY, summary),
            (_S.LTM, f"Session {_session(rng)} (yesterday): {history}"),
        ],
        [],
        slot_name=attr,
        historical_value=old,
    )
    if distract:
        line = f"Session {_session(rng)} ({rng.choice(WHEN)}): User's {attr} is {old}."
        sc.distractors.append((_S.LTM, line))
    return sc


SCENARIOS: dict[QueryType, Callable[[random.Random, bool], Scenario]] = {
    QueryType.SINGLE_HOP: _single_hop,
    QueryType.SINGLE_SESSION: _single_session,
    QueryType.RECENT_SESSION: _recent_session,
    QueryType.MULTI_HOP: _multi_hop,
    QueryType.MEMORY_CAPACITY: _memory_capacity,
    QueryType.TEMPORAL: _temporal,
    QueryType.KNOWLEDGE_UPDATE: _knowledge_update,
}

# query types whose scenarios can plant a stale conflicting fact
DISTRACTOR_TYPES = (QueryType.SINGLE_HOP, QueryType.KNOWLEDGE_UPDATE)

TEMPLATES: dict[QueryType, tuple[Template, ...]] = {
    QueryType.SINGLE_HOP: (
        Template("What is my {attr}?", "fact_lookup"),
        Template("What's my {attr}?", "fact_lookup"),
        Template("Quick question: what is my {attr} again?", "fact_lookup"),
        Template("Remind me of my {attr}, please."),
        Template("Pull up the {attr} you have on file for me."),
    ),
    QueryType.SINGLE_SESSION: (
        Template("What time did I just say the {event} is today?", "current_session"),
        Template("What time is the {event} I just mentioned?", "current_session"),
        Template("In this conversation, what time did I give for the {event}?", "current_session"),
        Template("When is today's {event}?", "current_session"),
        Template("Repeat the {event} time from my latest message a moment ago."),
    ),
    QueryType.RECENT_SESSION: (
        Template("What did we talk about last week?", "past_tense"),
        Template("Which plans did we discuss in our last session?", "past_tense"),
        Template("What topic came up when we chatted last week?", "past_tense"),
        Template("Remind me what we covered in the last session.", "past_tense"),
        Template("What was the main subject of our last chat?", "past_tense"),
    ),
    QueryType.MULTI_HOP: (
        Template("Compare my current role with the {project} project we discussed.", "multi_hop"),
        Template("How does my job relate to the {project} project?", "multi_hop"),
        Template("Which company is behind both my job and the {project} project?", "multi_hop"),
        Template("What is the difference between my employer and the team running {project}?", "multi_hop"),
        Template("Which company ran the {project} project that my team joined?"),
    ),
    QueryType.MEMORY_CAPACITY: (
        Template("List all the {category} I mentioned.", "quantity"),
        Template("Name every {singular} I have told you about.", "quantity"),
        Template("Give me all the {category} from our past chats.", "quantity"),
        Template("Quote the exact words I used when naming {category}."),
        Template("Which {category} came up across our sessions so far?"),
    ),
    QueryType.TEMPORAL: (
        Template("What was my {metric} before I started {change}?", "temporal"),
        Template("How has my {metric} changed since {change} began?", "temporal"),
        Template("What {metric} did I say I used to have?", "temporal"),
        Template("Back when I began {change}, what was my {metric}?", "temporal"),
        Template("Give the exact words and timestamp where I stated my old {metric}."),
    ),
    # no cue family targets {Sum, LTM} updates: these ride the fallback,
    # and the "changed" phrasing deliberately collides with the temporal rule
    QueryType.KNOWLEDGE_UPDATE: (
        Template("After the recent update, which {attr} do I have now?"),
        Template("Since I switched, what is the latest {attr} on record?"),
        Template("Now that things have moved on, tell me my up-to-date {attr}."),
        Template("My {attr} changed recently; what is it now?", "temporal"),
        Template("I updated my {attr} a while ago; which one is current?"),
    ),
}


# -- filler -------------------------------------------------------------------

STM_FILLER = (
    "User asked to schedule a follow-up call for tomorrow morning.",
    "User asked for a short summary of the agenda.",
    "User said the weather looks cloudy this afternoon.",
    "User wanted to double-check the spelling of a colleague's name.",
    "Assistant offered to set a reminder and the user agreed.",
    "User asked how to phrase a polite decline to an invitation.",
    "User mentioned feeling a bit tired after a long week.",
    "User requested a checklist for packing a carry-on bag.",
    "User asked to convert a recipe from cups to grams.",
    "User wondered whether to take the bus or walk to the office.",
    "Assistant drafted a two-line reply and the user approved it.",
    "User asked what the keyboard shortcut for undo is.",
    "User asked for a synonym for the word important.",
    "User wants the next reply to be shorter and more direct.",
    "User is deciding between tea and coffee for the afternoon.",
    "Assistant suggested three ways to shorten a slide deck.",
)
SUMMARY_FILLER = (
    "Preference: Prefers window seats on flights.",
    "Preference: Likes oat milk in coffee.",
    "Dietary: Avoids shellfish.",
    "Language: Speaks English and some Spanish.",
    "Preference: Prefers written messages over calls for work topics.",
    "Hobby: Enjoys long walks on weekends.",
    "Device: Uses a laptop for work and a tablet for reading.",
    "Schedule: Usually starts work around nine.",
    "Pet: Has a cat that sleeps most of the day.",
    "Preference: Likes concise answers with bullet points.",
    "Travel: Keeps a passport valid for several more years.",
    "Preference: Uses metric units for cooking.",
    "Music: Listens to jazz while working.",
    "Preference: Wants reminders a day in advance.",
    "Health: Tries to drink more water during the day.",
    "Preference: Dislikes loud open-plan offices.",
)
LTM_ACTIVITIES = (
    "asked for tips on sleeping better",
    "talked about repainting the garage",
    "planned a grocery list for the week",
    "asked for help writing a cover letter",
    "discussed houseplants that tolerate low light",
    "compared two mobile data plans",
    "asked about stretching routines for the back",
    "brainstormed gift ideas for a coworker",
    "talked about a podcast on ancient history",
    "asked how compound interest works",
    "worked through a spreadsheet formula",
    "weighed options for a weekend getaway",
    "asked for a simple pasta recipe",
    "talked through a disagreement with a neighbor",
    "reviewed notes for a job interview",
    "asked about learning to play guitar",
)
EPISODIC_UTTERANCES = (
    "Can you help me draft an email?",
    "That sounds good, thanks.",
    "Let me think about it for a bit.",
    "I'd rather keep it short.",
    "Could you explain that one more time?",
    "Okay, what's next on the list?",
    "Honestly I'm not sure yet.",
    "Remind me later this week.",
    "That's not quite what I meant.",
    "Sure, go ahead and add it.",
    "Can we skip that part?",
    "I'll check and get back to you.",
    "Perfect, that works for me.",
    "Wait, can you repeat the last step?",
    "No rush on this one.",
    "I think the second option is better.",
)


def filler_sentence(store: StoreId, rng: random.Random) -> str:
    if store is _S.STM:
        return rng.choice(STM_FILLER)
    if store is _S.SUMMARY:
        return rng.choice(SUMMARY_FILLER)
    if store is _S.LTM:
        return f"Session {_session(rng)} ({rng.choice(WHEN)}): User {rng.choice(LTM_ACTIVITIES)}."
    return f"Session {_session(rng)}, Turn {rng.randint(1, 12)}: User said '{rng.choice(EPISODIC_UTTERANCES)}'"
