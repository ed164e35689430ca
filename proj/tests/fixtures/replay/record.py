"""Regenerates providers.jsonl: recorded provider responses for the miniature datasets."""
import json
import pathlib

HERE = pathlib.Path(__file__).parent

# question -> (entity titles, query event titles, decomposition sentences, sentence event titles)
TABLE = {
    "who wrote the novel moby dick": (["Moby-Dick"], [], ["Moby-Dick is a novel.", "Moby-Dick has an author.", "The author wrote Moby-Dick."], ["Herman Melville"]),
    "what is the capital of france": (["France"], [], ["France is a country.", "France has a capital city.", "The capital is a city."], ["Paris"]),
    "when did the titanic sink": (["Titanic"], ["Titanic"], ["The Titanic was a ship.", "The Titanic sank.", "The sinking happened on a date."], []),
    "who painted the mona lisa": (["Mona Lisa"], [], ["The Mona Lisa is a painting.", "A painter painted it.", "The painter was Italian."], ["Leonardo da Vinci"]),
    "what is the largest planet in the solar system": (["Solar System"], [], ["The Solar System has planets.", "One planet is the largest.", "The largest planet is a gas giant."], ["Jupiter"]),
    "Which element has the chemical symbol Fe?": (["Iron"], [], ["Fe is a chemical symbol.", "The symbol names an element.", "The element is a metal."], []),
    "In which country is the city of Kyoto?": (["Kyoto"], [], ["Kyoto is a city.", "Kyoto is in a country.", "The country is in Asia."], ["Japan"]),
    "Who composed the opera The Magic Flute?": (["The Magic Flute"], [], ["The Magic Flute is an opera.", "A composer wrote it.", "It premiered in Vienna."], ["Wolfgang Amadeus Mozart"]),
    "What is the longest river in Africa?": (["Africa"], [], ["Africa has rivers.", "One river is the longest.", "The river flows north."], ["Nile"]),
    "Which planet is known as the Red Planet?": (["Red Planet"], [], ["A planet is called the Red Planet.", "Its surface is red.", "It is fourth from the Sun."], ["Mars"]),
    "In which city was the author of Moby-Dick born?": (["Moby-Dick"], [], ["Moby-Dick was written by Herman Melville.", "Herman Melville was born in a city.", "The city is in the United States."], ["Herman Melville"]),
    "Were Herman Melville and Mark Twain both American writers?": (["Herman Melville", "Mark Twain"], [], ["Herman Melville was a writer.", "Mark Twain was a writer.", "Both were American."], []),
    "The Eiffel Tower is located in the capital of which country?": (["Eiffel Tower"], [], ["The Eiffel Tower is in Paris.", "Paris is a capital.", "Paris is the capital of a country."], ["Paris", "France"]),
    "Is Kyoto the capital of Japan?": (["Kyoto", "Japan"], [], ["Kyoto is a city in Japan.", "Japan has a capital.", "The capital is Tokyo."], []),
    "Which river flows through the birthplace of Mozart?": (["Wolfgang Amadeus Mozart"], [], ["Mozart was born in Salzburg.", "A river flows through Salzburg.", "The river is the Salzach."], ["Salzburg"]),
    "is paris the capital of france": (["Paris", "France"], [], ["Paris is a city.", "France has a capital.", "The capital of France is Paris."], []),
    "is jupiter the largest planet in the solar system": (["Jupiter"], [], ["Jupiter is a planet.", "Planets differ in size.", "Jupiter is the largest."], []),
    "can penguins fly over the ocean": (["Penguin"], [], ["Penguins are birds.", "Some birds cannot fly.", "Penguins swim in the ocean."], []),
    "was the mona lisa painted by vincent van gogh": (["Mona Lisa"], [], ["The Mona Lisa is a painting.", "Vincent van Gogh was a painter.", "Leonardo da Vinci painted the Mona Lisa."], ["Leonardo da Vinci"]),
    "does water boil at 100 degrees celsius at sea level": (["Water"], [], ["Water is a liquid.", "Liquids boil when heated.", "Water boils at 100 degrees Celsius."], []),
    "Could Mozart have attended the premiere of The Magic Flute?": (["Wolfgang Amadeus Mozart", "The Magic Flute"], [], ["Mozart died in 1791.", "The Magic Flute premiered in 1791.", "The premiere came before his death."], []),
    "Did the Titanic complete its maiden voyage to New York City?": (["Titanic"], [], ["The Titanic left Southampton.", "The Titanic struck an iceberg.", "The Titanic sank before New York City."], []),
    "Does the Nile flow into the Mediterranean Sea?": (["Nile"], [], ["The Nile is a river.", "Rivers flow into seas.", "The Nile flows north."], []),
    "Would a penguin be able to fly to the North Pole?": (["Penguin"], [], ["Penguins cannot fly.", "The North Pole is far north.", "Penguins live in the south."], []),
    "Did Leonardo da Vinci paint the Mona Lisa?": (["Leonardo da Vinci", "Mona Lisa"], [], ["Leonardo da Vinci was a painter.", "The Mona Lisa is a painting.", "Leonardo painted it."], []),
}


def line(request, response):
    return json.dumps({"request": request, "response": response}, sort_keys=True, ensure_ascii=False)


def request_key(entry):
    return json.dumps(json.loads(entry)["request"], sort_keys=True)


def main():
    out = []
    for q, (entity, event, sentences, sentence_events) in TABLE.items():
        out.append(line({"op": "entity_link", "text": q, "k": 10}, {"titles": entity}))
        out.append(line({"op": "event_link", "text": q, "k": 5}, {"titles": event}))
        sets = [sentences for _ in range(5)]
        out.append(line({"op": "decompose", "text": q, "sets": 5, "sentences_per_set": 3}, {"decompositions": sets}))
        for s in sentences:
            out.append(line({"op": "event_link", "text": s, "k": 5}, {"titles": sentence_events}))
    seen, unique = set(), []
    for entry in out:
        if request_key(entry) not in seen:
            seen.add(request_key(entry))
            unique.append(entry)
    (HERE / "providers.jsonl").write_text("\n".join(unique) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
