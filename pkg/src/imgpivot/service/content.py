"""Built-in campaign text: caption-writing guidelines and the rating rubric.

Campaigns may override everything; these are the shipped defaults.  The
Hindi guideline block is the one our Hindi caption campaigns use verbatim.
"""

from __future__ import annotations

from ..evaluation import LIKERT_CATEGORIES

CAPTION_GUIDELINES: dict[str, list[str]] = {
    "en": [
        "You must describe each image with one sentence.",
        "Please provide an accurate description of the activities, people, "
        "animals and objects you see depicted in the image.",
        "Each description must be a single sentence.",
        "The description should be written in English.",
        "Try to be concise.",
        "If you don't know the word for a concept in English, you may borrow "
        "it from another language.",
        "Please pay attention to grammar and spelling.",
        "You don't have to use perfect English for this task. Describe the "
        "image as you see fit.",
    ],
    "hi": [
        "आपको एक वाक्य के साथ हर छवि का वर्णन करना होगा।",
        "कृपया उन गतिविधियों, लोगों, जानवरों और वस्तुओं का सटीक विवरण प्रदान करें जिन्हें आप चित्र में देख रहे हैं",
        "प्रत्येक विवरण एक ही वाक्य का होना चाहिए।",
        "विवरण हिंदी में लिखा जाना चाहिए।",
        "संक्षिप्त होने का प्रयास करें।",
        "अगर किसी शब्द का हिंदी में मतलब ना पता हो तो उसे इंग्लिश में ही लिख दें",
        "व्याकरण और वर्तनी पर ध्यान दें।",
        "छवि के वर्णन में शुद्ध हिंदी का उपयोग करना ज़रूरी नहीं है जैसा ठीक लगे लिखें",
    ],
}

#: Rating criteria as JSON-ready rows, best option first.
RATING_CRITERIA: list[dict] = [
    {"rating": value, "label": label, "criteria": criteria}
    for value, label, criteria in LIKERT_CATEGORIES
]


def default_guidelines(language: str) -> list[str] | None:
    return CAPTION_GUIDELINES.get(language)
