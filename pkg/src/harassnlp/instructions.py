"""Rater instruction text for both labeling rounds.

The five-category instruction is the one served to raters by the
annotation service. The nine-category instruction is the original pilot
wording, kept so pilot label files can be interpreted and merged.

The texts are stored verbatim, typos included. Note one known wording
quirk: the category 1 definition says "show the inferiority of men over
women", while the pilot category it absorbed ("Masculine harassment")
was about men's control over women, which suggests the intended reading
is the inferiority of women to men. The text is kept as written.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .taxonomy import Category, LegacyCategory


@dataclass(frozen=True)
class CategoryInstruction:
    """Definition card shown to raters for one category."""

    code: int
    name: str
    definition: str
    examples: tuple[str, ...]
    hint: str = ""
    false_examples: tuple[str, ...] = field(default=())


INSTRUCTIONS: dict[Category, CategoryInstruction] = {
    Category.INDIRECT_HARASSMENT: CategoryInstruction(
        code=1,
        name="Indirect harassment",
        definition=(
            "These tweets are around 1. stereotypic and traditional beliefs "
            "about women. or 2. show the inferiority of men over women. Or "
            "3. are indirectly sexist and doesn't have any swear words."
        ),
        examples=(
            "A wise woman builds her house but a foolish woman tears it down "
            "with her hands.",
            "Yes, we get it. You're pretty. Tone down the self promo and "
            "just cook.",
            "It's less of #adaywithoutwomen and more of a day without "
            "feminists, which to be quite honest, sounds lovely.",
        ),
    ),
    Category.INFORMATION_THREAT: CategoryInstruction(
        code=2,
        name="Information threat",
        definition=(
            "threats toward women that their information will be stolen and "
            "revealed or will be misused."
        ),
        examples=(
            "if you are seriously gonna try to change gaming, I will hack "
            "your account and put gay porn everywhere.",
            "I have all your names and ledger. 5000$ a month or I torch you "
            "all over the web, forever.",
        ),
    ),
    Category.SEXUAL_HARASSMENT: CategoryInstruction(
        code=3,
        name="Sexual harassment",
        definition=(
            "these tweets are 1. contain insulting words, name calling, "
            "words of anger and violence.2. force toward sex."
        ),
        examples=(
            "damn girls, you are fine.",
            "f.k that cunt, I would with my fist.",
        ),
    ),
    Category.PHYSICAL_HARASSMENT: CategoryInstruction(
        code=4,
        name="Physical harassment",
        definition=(
            "these tweets are about 1. Threats on female biology attributes, "
            "beauty of women.2. considering women as sex objects.3. implying "
            "sense of ignorance or lack of attractiveness. 4. Implying lack "
            "of physical or mental ability of women. 5. Using humour toward "
            "the female body. Tweets can contain insulting words or "
            "violence, but the concentration is on the previous 5 points."
        ),
        hint=(
            "female body getting disease, pain, breaks, disgusted. Comments "
            "on weight, breast size, hotness, lack of hotness."
        ),
        examples=(
            "Just putting it out there, you deserve all those deaths you "
            "are getting.",
            "don't pull the gender card. You are not being harassed because "
            "you are a woman. It is because you are an ignorant cunt.",
            "the menus look like they were made by a 5 year-old little "
            "girl. In this case just the mental age of a 5-year-old girl I "
            "guess.",
        ),
    ),
    Category.NOT_SEXIST: CategoryInstruction(
        code=5,
        name="Not sexist",
        definition=(
            "These tweets are not in the previous categories and are not "
            "sexist."
        ),
        examples=(),
    ),
}


PILOT_INSTRUCTIONS: dict[LegacyCategory, CategoryInstruction] = {
    LegacyCategory.BENEVOLENT: CategoryInstruction(
        code=1,
        name="Benevolent sexism",
        definition=(
            "Sexist beliefs represent stereotypic beliefs about women and "
            "the prescription of restricted roles that are framed in such a "
            "way that they can appear to represent positive beliefs or "
            "evaluations of women."
        ),
        hint="These tweets are indirectly sexist and do not have any swear words.",
        examples=(
            "A wise woman builds her house but a foolish woman tears it down "
            "with her hands.",
            "It's less of #adaywithoutwomen and more of a day without "
            "feminists, which, to be quite honest, sounds lovely.",
            "Lucky is the man who is the first love of a woman, but luckier "
            "is the woman who is the last love of a man.",
        ),
    ),
    LegacyCategory.PHYSICAL_THREATS: CategoryInstruction(
        code=2,
        name="Physical threats",
        definition=(
            "attacked in cyberspace on the basis of threats on their female "
            "biology. Comments on their physical attributes were made in a "
            "violent and aggressive manner that suggested the female body "
            "was bad, diseased, disgusting or killing without sexual "
            "intention."
        ),
        hint=(
            "classify if it is about the body of female to get a disease, "
            "pain, breaks, disgusted, or any violent or aggressive word "
            "about body parts or killing without sexual intention."
        ),
        examples=(
            "I was told I deserved to die a painful death.",
            "how about you get cancer.",
            "just putting it out there, you deserve all those deaths you "
            "are getting.",
        ),
    ),
    LegacyCategory.SEXUAL_THREATS: CategoryInstruction(
        code=3,
        name="Sexual threats",
        definition=(
            "harassment of women online as a kind of pornographic "
            "invitation? which perpetuates hierarchical gender norms and "
            "incites others to display threatening sexual behavior towards "
            "the victim."
        ),
        hint="tweets related to forcing women to have sex.",
        examples=("f.k that cunt, I would with my fist.",),
        false_examples=(
            "Hope one of those bitches falls over and breaks her leg (this "
            "tweet is more about breaking and falling so its right category "
            "is #2)",
        ),
    ),
    LegacyCategory.BODY_HARASSMENT: CategoryInstruction(
        code=4,
        name="Body harassment",
        definition=(
            "sexual harassment related to the body or beauty of the women "
            "in particularly reliant on positioning women as sex objects. "
            "Alongside remarks reposted in the hashtag which were concerned "
            "with weight, breast size, hotness, lack of hotness or humor of "
            "their body or their clothes or beauty."
        ),
        examples=(
            "I cannot stop looking at Nikki's dreadful black crooked bra.",
        ),
    ),
    LegacyCategory.MASCULINE_HARASSMENT: CategoryInstruction(
        code=5,
        name="Masculine harassment",
        definition=(
            "tweets that are sexism and show the men control over women and "
            "relate to maculate or show the inferiority of the women. "
            "online abuse which can only be used against the female sex in "
            "patriarchal society."
        ),
        hint=(
            "tweets against working women, or lack of their physical or "
            "mental ability."
        ),
        examples=(
            "The menus look like they were made by a 5-year-old little "
            "girl...in this case just the mental age of a 5 year old girl I "
            "guess",
            "Yes, we get it. You're pretty. Tone down the self promo and "
            "just cook",
        ),
    ),
    LegacyCategory.LACK_OF_ATTRACTIVENESS: CategoryInstruction(
        code=6,
        name="Lack of attractiveness harassment",
        definition=(
            "tweets that show the feeling of ignorant or lack of being sexy "
            "or ignorant."
        ),
        examples=(
            "don't pull the gender card. You're not being harassed because "
            "you're a women. It is because you are an ignorant cunt.",
            "stop calling yourselves pretty and hot..you're not and saying "
            "it a million times doesn't make you either",
            "why do they keep saying that they are so pretty",
        ),
    ),
    LegacyCategory.STALKING: CategoryInstruction(
        code=7,
        name="Stalking",
        definition=(
            "someone sought and compiled information about you and used it "
            "to harass, threaten and/or intimidate you. Behaviors include "
            "repeated pursuit, premeditation, repetition, and obsession "
            "with the victim. Feel continually scared, threatened and "
            "vulnerable"
        ),
        hint="a women's street address.",
        examples=(
            "I have all your names on ledger. 5000$ a month or I torch you "
            "all over the web, forever.",
        ),
    ),
    LegacyCategory.IMPERSONATION: CategoryInstruction(
        code=8,
        name="Impersonation",
        definition="treating that the identity will be stolen.",
        examples=(
            "if you are seriously gonna try to change gaming, I will hack "
            "your account and put gay porn everywhere",
        ),
    ),
    LegacyCategory.GENERAL_SEXIST: CategoryInstruction(
        code=9,
        name="General sexist statements",
        definition=(
            "the sentences that are not in the previous categories and are "
            "insulting and give the sense of violence toward women by using "
            "the insulting words."
        ),
        hint="tweets related to women name calling or words of anger.",
        examples=("damn girls, you are fine.",),
    ),
}
