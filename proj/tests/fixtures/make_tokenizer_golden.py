"""Regenerates tokenizer_golden.jsonl from NLTK's Treebank tokenizer.

Each entry is a list of sentences; the expected tokens are the Treebank
tokens of each sentence, lowercased, concatenated, with standalone
underscore runs mapped to <BLANK>.
"""
import json
import re
import sys

from nltk.tokenize import TreebankWordTokenizer

ENTRIES = [
    ["I _ apples."],
    ["don't"],
    ["As a Senior student, I have to _ many exams."],
    ["I am calling from the _ station."],
    ["\"There was an accident, and a man died.\""],
    ["He was _ and after thanking him for his honesty, he said angrily."],
    ["They are used to _ messages by computers and smart phones."],
    ["They'll save and invest more."],
    ["hi, my name can't hello,"],
    ["She said, \"I won't go there again!\""],
    ["It's John's book, isn't it?"],
    ["We've been waiting for hours; nobody came."],
    ["You'd better ask the teacher (she knows)."],
    ["The price is $3.88 and the tax is 5%."],
    ["Wait... what did you say?"],
    ["I cannot believe it's already 10:30."],
    ["We're gonna need a bigger boat."],
    ["Mr. Smith lives in the U.S. with his family."],
    ["The students' books were left in the classroom."],
    ["He asked, 'Are you sure?'"],
    ["Email me at tom@example.com or call #42."],
    ["First, mix the flour; second, add the eggs."],
    ["The numbers were 1,000 and 2,500 respectively."],
    ["I'm not sure whether she'd agree."],
    ["Thank you very much for your help!"],
    ["Congratulations on your birthday, Frank."],
    ["The festivals in California are famous."],
    ["Let me think -- no, that's wrong."],
    ["Gimme a break, I wanna rest."],
    ["Why don't you join us for dinner?"],
    ["The old man, who had lived there for years, smiled."],
    ["She couldn't find her keys [again]."],
    ["\"Hello,\" he said, \"how are you?\""],
    ["We should've left earlier."],
    ["It was the best of times, it was the worst of times."],
    ["Tom & Jerry is a cartoon."],
    ["The meeting is at 9:00 a.m. tomorrow."],
    ["Don't worry, be happy!"],
    ["Where're you going?"],
    ["The teacher gave us _ homework than usual."],
    ["My brother's friend didn't come."],
    ["Is this {really} necessary?"],
    ["A B C D"],
    ["The results are quite robust to a wide range of values."],
    ["She got ta go now."],
    ["I lived there.", "Then I moved away."],
    ["He smiled.", "She laughed!", "They left?"],
    ["Take the _ to school.", "Don't be late."],
    ["You can't always get what you want."],
    ["The boy said that he'd finished his work, but he hadn't."],
]


def expected(sentences):
    tok = TreebankWordTokenizer()
    out = []
    for s in sentences:
        for t in tok.tokenize(s):
            out.append("<BLANK>" if re.fullmatch(r"_+", t) else t.lower())
    return out


def main(path):
    with open(path, "w", encoding="utf-8") as f:
        for sentences in ENTRIES:
            f.write(json.dumps({"text": " ".join(sentences), "tokens": expected(sentences)}) + "\n")


if __name__ == "__main__":
    main(sys.argv[1])
