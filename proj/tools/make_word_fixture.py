"""Writes data/probe_words.csv, a hand-curated reconstruction of the
abstract/concrete word dataset (the original is unpublished). The first five
rows are the published examples; the rest follow the same pattern."""
import csv
import sys

ROWS = [
    ("despair", "The complete loss or absence of hope.", "cat", "hopelessness", "emotion"),
    ("wisdom", "The quality of having experience, knowledge, and good judgment; the quality of being wise.", "shoe", "sagacity", "quality"),
    ("loneliness", "Sadness because one has no friends or company.", "turtle", "isolation", "feeling"),
    ("inspiration", "The process of being mentally stimulated to do or feel something, especially to do something creative.", "lion", "stimulus", "process"),
    ("thrill", "An intense feeling of excitement or happiness.", "bear", "excitement", "feeling"),
    ("joy", "A feeling of great pleasure and gladness.", "dog", "delight", "emotion"),
    ("anger", "A strong feeling of annoyance or hostility.", "horse", "rage", "emotion"),
    ("fear", "An unpleasant emotion caused by the belief that something is dangerous.", "rabbit", "dread", "emotion"),
    ("grief", "Deep sorrow, especially caused by someone's death.", "umbrella", "sorrow", "emotion"),
    ("hope", "A feeling of expectation and desire for a certain thing to happen.", "bicycle", "optimism", "feeling"),
    ("courage", "The ability to do something that frightens one.", "elephant", "bravery", "virtue"),
    ("freedom", "The power or right to act, speak, or think as one wants.", "bird", "liberty", "right"),
    ("justice", "Just behaviour or treatment; fairness in the way people are dealt with.", "hammer", "fairness", "principle"),
    ("peace", "Freedom from disturbance; quiet and tranquillity.", "boat", "tranquillity", "state"),
    ("love", "An intense feeling of deep affection.", "apple", "affection", "emotion"),
    ("envy", "A feeling of discontented longing aroused by someone else's possessions or luck.", "car", "jealousy", "emotion"),
    ("pride", "A feeling of deep pleasure derived from one's own achievements.", "peacock", "dignity", "emotion"),
    ("shame", "A painful feeling of humiliation caused by awareness of wrong or foolish behaviour.", "chair", "humiliation", "emotion"),
    ("guilt", "The feeling of having done wrong or failed in an obligation.", "clock", "remorse", "feeling"),
    ("curiosity", "A strong desire to know or learn something.", "owl", "inquisitiveness", "desire"),
    ("boredom", "The state of feeling weary because one is unoccupied or lacks interest.", "sofa", "tedium", "state"),
    ("anxiety", "A feeling of worry or unease about something with an uncertain outcome.", "spider", "worry", "emotion"),
    ("serenity", "The state of being calm, peaceful, and untroubled.", "lake", "calmness", "state"),
    ("nostalgia", "A sentimental longing for a period in the past.", "radio", "longing", "feeling"),
    ("gratitude", "The quality of being thankful.", "flower", "thankfulness", "quality"),
    ("honesty", "The quality of being truthful and sincere.", "book", "truthfulness", "virtue"),
    ("kindness", "The quality of being friendly, generous, and considerate.", "cup", "benevolence", "virtue"),
    ("patience", "The capacity to accept delay or trouble without getting upset.", "snail", "forbearance", "virtue"),
    ("ambition", "A strong desire to do or achieve something.", "ladder", "aspiration", "desire"),
    ("greed", "Intense and selfish desire for wealth, power, or food.", "pig", "avarice", "vice"),
    ("jealousy", "Resentment against a rival or against another's success.", "cake", "resentment", "emotion"),
    ("melancholy", "A deep and pensive sadness, typically with no obvious cause.", "piano", "gloom", "emotion"),
    ("happiness", "The state of being happy.", "balloon", "contentment", "state"),
    ("sadness", "The condition or quality of being sad.", "candle", "unhappiness", "emotion"),
    ("trust", "Firm belief in the reliability or truth of someone or something.", "key", "confidence", "belief"),
    ("betrayal", "The action of being disloyal to a person or cause.", "knife", "treachery", "action"),
    ("victory", "An act of defeating an enemy or opponent.", "flag", "triumph", "outcome"),
    ("defeat", "An instance of being beaten in a contest.", "sword", "loss", "outcome"),
    ("chaos", "Complete disorder and confusion.", "train", "disorder", "state"),
    ("harmony", "The quality of forming a pleasing and consistent whole.", "violin", "accord", "quality"),
    ("beauty", "A combination of qualities that pleases the aesthetic senses.", "rose", "loveliness", "quality"),
    ("silence", "Complete absence of sound.", "bell", "quiet", "state"),
    ("memory", "Something remembered from the past.", "camera", "recollection", "cognition"),
    ("imagination", "The ability of the mind to be creative or resourceful.", "rocket", "creativity", "ability"),
    ("knowledge", "Facts, information, and skills acquired through experience or education.", "pencil", "understanding", "cognition"),
    ("faith", "Complete trust or confidence in someone or something.", "church", "belief", "attitude"),
    ("doubt", "A feeling of uncertainty or lack of conviction.", "mirror", "uncertainty", "feeling"),
    ("regret", "A feeling of sadness about something done or left undone.", "letter", "remorse", "feeling"),
    ("relief", "A feeling of reassurance following release from anxiety.", "pillow", "comfort", "feeling"),
    ("surprise", "An unexpected or astonishing event or fact.", "gift", "astonishment", "event"),
    ("wonder", "A feeling of amazement caused by something beautiful or unfamiliar.", "star", "awe", "feeling"),
    ("compassion", "Sympathetic pity and concern for the sufferings of others.", "nurse", "sympathy", "emotion"),
    ("cruelty", "Behaviour that causes pain or suffering to others.", "wolf", "brutality", "behaviour"),
    ("generosity", "The quality of being kind and willing to give.", "basket", "charity", "virtue"),
    ("humility", "A modest or low view of one's own importance.", "mouse", "modesty", "virtue"),
    ("arrogance", "The quality of being unpleasantly proud.", "crown", "conceit", "vice"),
    ("loyalty", "A strong feeling of support or allegiance.", "puppy", "allegiance", "virtue"),
    ("friendship", "The state of being friends.", "bench", "companionship", "relationship"),
    ("hatred", "Intense dislike.", "snake", "hate", "emotion"),
    ("tenderness", "Gentleness and kindness.", "blanket", "gentleness", "quality"),
    ("fury", "Wild or violent anger.", "tiger", "wrath", "emotion"),
    ("calm", "The absence of violent or confused activity.", "feather", "stillness", "state"),
    ("panic", "Sudden uncontrollable fear or anxiety.", "alarm", "terror", "emotion"),
    ("delight", "Great pleasure.", "cookie", "pleasure", "feeling"),
    ("misery", "A state of great distress or discomfort of mind or body.", "bucket", "suffering", "state"),
    ("success", "The accomplishment of an aim or purpose.", "trophy", "achievement", "outcome"),
    ("failure", "Lack of success.", "brick", "defeat", "outcome"),
    ("danger", "The possibility of suffering harm or injury.", "shark", "peril", "possibility"),
    ("safety", "The condition of being protected from danger.", "helmet", "security", "condition"),
    ("poverty", "The state of being extremely poor.", "coin", "destitution", "state"),
    ("wealth", "An abundance of valuable possessions or money.", "diamond", "riches", "abundance"),
    ("honor", "High respect; great esteem.", "medal", "esteem", "quality"),
    ("disgust", "A feeling of revulsion or strong disapproval.", "rat", "revulsion", "emotion"),
    ("contempt", "The feeling that something is worthless or beneath consideration.", "boot", "scorn", "emotion"),
    ("passion", "Strong and barely controllable emotion.", "fire", "ardor", "emotion"),
    ("apathy", "Lack of interest, enthusiasm, or concern.", "stone", "indifference", "state"),
    ("enthusiasm", "Intense and eager enjoyment or interest.", "drum", "eagerness", "feeling"),
    ("fatigue", "Extreme tiredness resulting from effort or illness.", "bed", "exhaustion", "state"),
    ("energy", "The strength required for sustained activity.", "battery", "vigor", "strength"),
    ("innocence", "Lack of guile or corruption; purity.", "lamb", "purity", "quality"),
    ("mystery", "Something that is difficult or impossible to understand.", "castle", "enigma", "thing"),
    ("truth", "The quality or state of being true.", "lamp", "veracity", "quality"),
    ("deception", "The action of deceiving someone.", "fox", "deceit", "action"),
    ("eternity", "Infinite or unending time.", "hourglass", "infinity", "time"),
    ("youth", "The period between childhood and adult age.", "skateboard", "adolescence", "period"),
    ("ignorance", "Lack of knowledge or information.", "hat", "unawareness", "state"),
    ("tranquility", "The quality or state of being tranquil; calm.", "swan", "serenity", "state"),
    ("rage", "Violent, uncontrollable anger.", "bull", "fury", "emotion"),
    ("sorrow", "A feeling of deep distress caused by loss or disappointment.", "willow", "grief", "emotion"),
    ("triumph", "A great victory or achievement.", "chariot", "victory", "achievement"),
    ("devotion", "Love, loyalty, or enthusiasm for a person or activity.", "ring", "dedication", "love"),
    ("confusion", "Lack of understanding; uncertainty.", "maze", "bewilderment", "state"),
    ("clarity", "The quality of being clear and easy to understand.", "window", "lucidity", "quality"),
    ("solitude", "The state of being alone.", "lighthouse", "seclusion", "state"),
    ("greatness", "The quality of being great, distinguished, or eminent.", "statue", "eminence", "quality"),
    ("sympathy", "Feelings of pity and sorrow for someone else's misfortune.", "teddy bear", "pity", "feeling"),
    ("desire", "A strong feeling of wanting to have something.", "cherry", "longing", "feeling"),
    ("terror", "Extreme fear.", "ghost", "horror", "fear"),
    ("bliss", "Perfect happiness; great joy.", "cloud", "ecstasy", "happiness"),
    ("resilience", "The capacity to recover quickly from difficulties.", "cactus", "toughness", "capacity"),
]


def main(path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "w_abs", "w_abs_def", "w_con", "w_syn", "w_hyp"])
        for i, (abs_, definition, con, syn, hyp) in enumerate(ROWS, 1):
            w.writerow([f"wb{i:03d}", abs_, definition, con, syn, hyp])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/probe_words.csv")
