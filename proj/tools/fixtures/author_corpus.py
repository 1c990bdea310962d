#!/usr/bin/env python3
"""Writes the authored part of the fixture corpus: schemas, user goals and
search rows. Gold dialogs and request annotations are filled in afterwards by
todkit_make_gold."""

import json
import pathlib
import shutil
import sys

ROOT = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")


def slot(name, values=(), description=None, aliases=()):
    s = {"name": name, "possible_values": list(values)}
    if description:
        s["description"] = description
    if aliases:
        s["aliases"] = list(aliases)
    return s


def intent(name, transactional, required, optional=()):
    return {"name": name, "is_transactional": transactional,
            "required_slots": list(required), "optional_slots": list(optional)}


SCHEMAS = {
    "Weather": {
        "service_name": "Weather",
        "intents": [intent("GetWeather", False, ["city"], ["date"])],
        "slots": [slot("city"), slot("date"), slot("temperature"), slot("precipitation"),
                  slot("humidity"), slot("wind")],
    },
    "Homes": {
        "service_name": "Homes",
        "intents": [
            intent("FindHomeByArea", False, ["area", "intent"], ["number_of_beds", "number_of_baths"]),
            intent("ScheduleVisit", True, ["property_name", "visit_date"]),
        ],
        "slots": [slot("area"), slot("intent", ["rent", "buy"]), slot("number_of_beds", ["1", "2", "3", "4"]),
                  slot("number_of_baths", ["1", "2", "3"]), slot("property_name"), slot("visit_date"),
                  slot("phone_number"), slot("address"), slot("rent")],
    },
    "RentalCars": {
        "service_name": "RentalCars",
        "intents": [
            intent("GetCarsAvailable", False, ["city", "start_date", "pickup_time", "end_date"], ["car_type"]),
            intent("ReserveCar", True, ["pickup_location", "start_date", "pickup_time", "end_date", "car_type",
                                        "add_insurance"]),
        ],
        "slots": [slot("city"), slot("start_date"), slot("pickup_time", aliases=["time", "pick it up"]),
                  slot("end_date"), slot("car_type", ["Compact", "Hatchback", "Sedan", "SUV"]),
                  slot("pickup_location"), slot("add_insurance", ["True", "False"], aliases=["insurance"]),
                  slot("price_per_day"), slot("car_name")],
    },
    "Restaurants": {
        "service_name": "Restaurants",
        "intents": [
            intent("FindRestaurants", False, ["city", "cuisine"], ["price_range", "has_live_music"]),
            intent("ReserveRestaurant", True, ["restaurant_name", "city", "time"], ["date", "number_of_seats"]),
        ],
        "slots": [slot("city"), slot("cuisine"), slot("price_range", ["inexpensive", "moderate", "expensive"]),
                  slot("has_live_music", ["True", "False"]), slot("restaurant_name"), slot("time"),
                  slot("date"), slot("number_of_seats", ["1", "2", "3", "4", "5", "6"]),
                  slot("phone_number"), slot("street_address")],
    },
    "Hotels": {
        "service_name": "Hotels",
        "intents": [
            intent("SearchHotel", False, ["location"], ["rating", "price_level", "stars"]),
            intent("BookHotel", True, ["hotel_name", "check_in_date", "number_of_nights", "number_of_rooms"]),
        ],
        "slots": [slot("location"), slot("rating"), slot("price_level", ["cheap", "moderate", "expensive"]),
                  slot("stars", ["1", "2", "3", "4", "5"]), slot("hotel_name"), slot("check_in_date"),
                  slot("number_of_nights"), slot("number_of_rooms"), slot("phone_number"), slot("address"),
                  slot("price_per_night")],
    },
    "Attractions": {
        "service_name": "Attractions",
        "intents": [intent("FindAttraction", False, ["location"], ["type", "rating", "entrance_fee"])],
        "slots": [slot("location"), slot("type", ["museum", "park", "zoo", "landmark", "theme park"]),
                  slot("rating"), slot("entrance_fee"), slot("attraction_name"), slot("address"),
                  slot("phone_number")],
    },
}


def call(method, **params):
    parts = []
    for k, v in params.items():
        parts.append(f"{k}: {v}")
    return f"APICall(method='{method}', parameters={{{', '.join(parts)}}})"


# Reusable calls with their search rows.
WEATHER_VAN = (call("GetWeather", city="Vancouver", date="2024-03-02"),
               [{"city": "Vancouver", "date": "2024-03-02", "temperature": 68, "precipitation": "10%",
                 "humidity": "26%", "wind": "3 mph"}])
WEATHER_SEA = (call("GetWeather", city="Seattle"),
               [{"city": "Seattle", "date": "2024-03-05", "temperature": 54, "precipitation": "60%",
                 "humidity": "81%", "wind": "9 mph"}])
WEATHER_SD = (call("GetWeather", city="San Diego", date="2024-03-10"),
              [{"city": "San Diego", "date": "2024-03-10", "temperature": 72, "precipitation": "0%",
                "humidity": "40%", "wind": "5 mph"}])
WEATHER_OAK = (call("GetWeather", city="Oakland", date="2024-04-01"),
               [{"city": "Oakland", "date": "2024-04-01", "temperature": 63, "precipitation": "5%",
                 "humidity": "55%", "wind": "12 mph"}])
HOMES_FIND_FREMONT = (call("FindHomeByArea", area="Fremont", intent="rent", number_of_beds=2),
                      [{"property_name": "Golf Club Manor Apartments", "address": "1 Golf Club Dr",
                        "phone_number": "510-581-0911", "rent": 2450, "number_of_beds": 2,
                        "number_of_baths": 2},
                       {"property_name": "Mission Peak Villas", "address": "88 Mission Blvd",
                        "phone_number": "510-555-0144", "rent": 2700, "number_of_beds": 2,
                        "number_of_baths": 1}])
HOMES_FIND_SJ = (call("FindHomeByArea", area="San Jose", intent="buy", number_of_beds=3, number_of_baths=2),
                 [{"property_name": "Willow Glen Commons", "address": "1200 Lincoln Ave",
                   "phone_number": "408-555-0190", "rent": 4100, "number_of_beds": 3, "number_of_baths": 2}])
HOMES_VISIT_GOLF = (call("ScheduleVisit", property_name="Golf Club Manor Apartments", visit_date="2024-03-08"),
                    [{"property_name": "Golf Club Manor Apartments", "visit_date": "2024-03-08",
                      "address": "1 Golf Club Dr", "phone_number": "510-581-0911"}])
HOMES_VISIT_WILLOW = (call("ScheduleVisit", property_name="Willow Glen Commons", visit_date="2024-03-15"),
                      [{"property_name": "Willow Glen Commons", "visit_date": "2024-03-15",
                        "address": "1200 Lincoln Ave", "phone_number": "408-555-0190"}])
CARS_GET_SD = (call("GetCarsAvailable", city="San Diego", start_date="2024-03-10", pickup_time="15:00",
                    end_date="2024-03-12"),
               [{"car_name": "Honda Fit", "car_type": "Hatchback", "pickup_location": "Santa Fe Depot",
                 "price_per_day": 39.0, "start_date": "2024-03-10", "end_date": "2024-03-12"},
                {"car_name": "Toyota Camry", "car_type": "Sedan", "pickup_location": "Santa Fe Depot",
                 "price_per_day": 52.0, "start_date": "2024-03-10", "end_date": "2024-03-12"}])
CARS_GET_VAN = (call("GetCarsAvailable", city="Vancouver", start_date="2024-03-03", pickup_time="10:30",
                     end_date="2024-03-06", car_type="SUV"),
                [{"car_name": "Ford Escape", "car_type": "SUV", "pickup_location": "Pacific Central Station",
                  "price_per_day": 61.0, "start_date": "2024-03-03", "end_date": "2024-03-06"}])
CARS_RESERVE_SD = (call("ReserveCar", pickup_location="Santa Fe Depot", start_date="2024-03-10",
                        pickup_time="15:00", end_date="2024-03-12", car_type="Hatchback", add_insurance="True"),
                   [{"car_name": "Honda Fit", "car_type": "Hatchback", "pickup_location": "Santa Fe Depot",
                     "price_per_day": 39.0, "start_date": "2024-03-10", "end_date": "2024-03-12",
                     "add_insurance": True}])
CARS_RESERVE_FREMONT = (call("ReserveCar", pickup_location="Fremont BART", start_date="2024-03-08",
                             pickup_time="09:00", end_date="2024-03-09", car_type="Hatchback",
                             add_insurance="False"),
                        [{"car_name": "Chevrolet Spark", "car_type": "Hatchback", "pickup_location": "Fremont BART",
                          "price_per_day": 33.0, "start_date": "2024-03-08", "end_date": "2024-03-09",
                          "add_insurance": False}])
CARS_RESERVE_VAN = (call("ReserveCar", pickup_location="Pacific Central Station", start_date="2024-03-03",
                         pickup_time="10:30", end_date="2024-03-06", car_type="SUV", add_insurance="False"),
                    [{"car_name": "Ford Escape", "car_type": "SUV", "pickup_location": "Pacific Central Station",
                      "price_per_day": 61.0, "start_date": "2024-03-03", "end_date": "2024-03-06",
                      "add_insurance": False}])
CARS_RESERVE_OAK = (call("ReserveCar", pickup_location="Oakland Airport", start_date="2024-04-01",
                         pickup_time="20:00", end_date="2024-04-02", car_type="Compact", add_insurance="True"),
                    [{"car_name": "Nissan Versa", "car_type": "Compact", "pickup_location": "Oakland Airport",
                      "price_per_day": 29.0, "start_date": "2024-04-01", "end_date": "2024-04-02",
                      "add_insurance": True}])
REST_FIND_OAK = (call("FindRestaurants", city="Oakland", cuisine="Mexican"),
                 [{"restaurant_name": "Cosecha", "city": "Oakland", "cuisine": "Mexican",
                   "price_range": "moderate", "phone_number": "510-452-5900",
                   "street_address": "907 Washington St", "has_live_music": False}])
REST_FIND_SJ = (call("FindRestaurants", city="San Jose", cuisine="Italian", price_range="moderate"),
                [{"restaurant_name": "Il Fornaio", "city": "San Jose", "cuisine": "Italian",
                  "price_range": "moderate", "phone_number": "408-271-3366",
                  "street_address": "302 S Market St", "has_live_music": False}])
REST_FIND_HK = (call("FindRestaurants", city="Hong Kong", cuisine="Cantonese", has_live_music="False"),
                [{"restaurant_name": "Tim Ho Wan", "city": "Hong Kong", "cuisine": "Cantonese",
                  "price_range": "inexpensive", "phone_number": "2332-2896",
                  "street_address": "9-11 Fuk Wing St", "has_live_music": False}])
REST_RESERVE_OAK = (call("ReserveRestaurant", restaurant_name="Cosecha", city="Oakland", time="18:30",
                         number_of_seats=2),
                    [{"restaurant_name": "Cosecha", "city": "Oakland", "time": "18:30", "number_of_seats": 2,
                      "phone_number": "510-452-5900", "street_address": "907 Washington St"}])
REST_RESERVE_HK = (call("ReserveRestaurant", restaurant_name="Tim Ho Wan", city="Hong Kong", time="12:00",
                        date="2024-05-04", number_of_seats=4),
                   [{"restaurant_name": "Tim Ho Wan", "city": "Hong Kong", "time": "12:00", "date": "2024-05-04",
                     "number_of_seats": 4, "phone_number": "2332-2896", "street_address": "9-11 Fuk Wing St"}])
REST_RESERVE_SD = (call("ReserveRestaurant", restaurant_name="Puesto", city="San Diego", time="19:00",
                        date="2024-03-10"),
                   [{"restaurant_name": "Puesto", "city": "San Diego", "time": "19:00", "date": "2024-03-10",
                     "phone_number": "619-233-8880", "street_address": "789 W Harbor Dr"}])
HOTEL_SEARCH_HK = (call("SearchHotel", location="Hong Kong", rating="at_least(4)",
                        price_level="one_of(cheap|moderate)"),
                   [{"hotel_name": "Mini Hotel Central", "location": "Hong Kong", "rating": 4.2,
                     "price_level": "cheap", "stars": 3, "price_per_night": 620,
                     "address": "38 Ice House St", "phone_number": "2103-0999"}])
HOTEL_SEARCH_KLN = (call("SearchHotel", location="Kowloon", stars="at_most(3)"),
                    [{"hotel_name": "Dorsett Mongkok", "location": "Kowloon", "rating": 4.0,
                      "price_level": "moderate", "stars": 3, "price_per_night": 780,
                      "address": "88 Tai Kok Tsui Rd", "phone_number": "3996-6666"}])
HOTEL_SEARCH_TST = (call("SearchHotel", location="Tsim Sha Tsui", rating="at_least(4.5)",
                         price_level="not(expensive)"),
                    [{"hotel_name": "Hotel Icon", "location": "Tsim Sha Tsui", "rating": 4.6,
                      "price_level": "moderate", "stars": 4, "price_per_night": 1350,
                      "address": "17 Science Museum Rd", "phone_number": "3400-1000"}])
HOTEL_BOOK_HK = (call("BookHotel", hotel_name="Mini Hotel Central", check_in_date="2024-05-03",
                      number_of_nights=2, number_of_rooms=1),
                 [{"hotel_name": "Mini Hotel Central", "check_in_date": "2024-05-03", "number_of_nights": 2,
                   "number_of_rooms": 1, "price_per_night": 620, "phone_number": "2103-0999"}])
HOTEL_BOOK_KLN = (call("BookHotel", hotel_name="Dorsett Mongkok", check_in_date="2024-06-10",
                       number_of_nights=3, number_of_rooms=2),
                  [{"hotel_name": "Dorsett Mongkok", "check_in_date": "2024-06-10", "number_of_nights": 3,
                    "number_of_rooms": 2, "price_per_night": 780, "phone_number": "3996-6666"}])
HOTEL_BOOK_ICON = (call("BookHotel", hotel_name="Hotel Icon", check_in_date="2024-07-01",
                        number_of_nights=1, number_of_rooms=1),
                   [{"hotel_name": "Hotel Icon", "check_in_date": "2024-07-01", "number_of_nights": 1,
                     "number_of_rooms": 1, "price_per_night": 1350, "phone_number": "3400-1000"}])
ATTR_HK = (call("FindAttraction", location="Hong Kong", type="not(museum)", entrance_fee="at_most(100)"),
           [{"attraction_name": "Victoria Peak", "location": "Hong Kong", "type": "landmark", "rating": 4.7,
             "entrance_fee": 0, "address": "128 Peak Rd", "phone_number": "2849-0668"}])
ATTR_KLN = (call("FindAttraction", location="Kowloon", type="one_of(park|zoo)", rating="at_least(4)"),
            [{"attraction_name": "Kowloon Walled City Park", "location": "Kowloon", "type": "park",
              "rating": 4.4, "entrance_fee": 0, "address": "Tung Tsing Rd", "phone_number": "2716-9962"}])
ATTR_TST = (call("FindAttraction", location="Tsim Sha Tsui", rating="at_least(4.5)"),
            [{"attraction_name": "Avenue of Stars", "location": "Tsim Sha Tsui", "type": "landmark",
              "rating": 4.5, "entrance_fee": 0, "address": "Salisbury Rd", "phone_number": "2508-1234"}])

# dialog_id -> (domains, [(call, rows, request slots)])
ITEMS = {
    "single_01": (["Weather"], [(*WEATHER_VAN, ["temperature"])]),
    "single_02": (["Homes"], [(*HOMES_FIND_FREMONT, ["phone_number"]), (*HOMES_VISIT_GOLF, [])]),
    "single_03": (["RentalCars"], [(*CARS_GET_SD, []), (*CARS_RESERVE_SD, ["price_per_day"])]),
    "single_04": (["Restaurants"], [(*REST_FIND_OAK, ["street_address"]), (*REST_RESERVE_OAK, [])]),
    "single_05": (["Hotels"], [(*HOTEL_SEARCH_HK, ["address"]), (*HOTEL_BOOK_HK, [])]),
    "single_06": (["Attractions"], [(*ATTR_HK, ["address", "phone_number"])]),
    "single_07": (["Weather"], [(*WEATHER_SEA, ["humidity"])]),
    "single_08": (["Restaurants"], [(*REST_FIND_SJ, ["phone_number"])]),
    "single_09": (["Hotels"], [(*HOTEL_SEARCH_KLN, []), (*HOTEL_BOOK_KLN, ["phone_number"])]),
    "single_10": (["RentalCars"], [(*CARS_GET_VAN, ["price_per_day"])]),
    "multi_01": (["Weather", "Homes", "RentalCars"],
                 [(*WEATHER_VAN, ["temperature"]), (*HOMES_VISIT_GOLF, ["address"]), (*CARS_RESERVE_FREMONT, [])]),
    "multi_02": (["Restaurants", "Weather"],
                 [(*REST_FIND_OAK, []), (*REST_RESERVE_OAK, ["phone_number"]), (*WEATHER_OAK, ["wind"])]),
    "multi_03": (["Hotels", "Attractions"],
                 [(*HOTEL_SEARCH_TST, []), (*HOTEL_BOOK_ICON, []), (*ATTR_TST, ["address"])]),
    "multi_04": (["Homes", "RentalCars"],
                 [(*HOMES_FIND_SJ, ["address"]), (*HOMES_VISIT_WILLOW, []), (*CARS_GET_SD, ["price_per_day"])]),
    "multi_05": (["Attractions", "Restaurants"], [(*ATTR_KLN, ["address"]), (*REST_FIND_HK, [])]),
    "multi_06": (["Weather", "RentalCars"],
                 [(*WEATHER_SD, ["precipitation"]), (*CARS_GET_SD, []), (*CARS_RESERVE_SD, [])]),
    "multi_07": (["Hotels", "Restaurants"], [(*HOTEL_SEARCH_KLN, ["price_per_night"]), (*REST_RESERVE_HK, [])]),
    "multi_08": (["Homes", "Weather"], [(*HOMES_FIND_FREMONT, []), (*WEATHER_SEA, ["temperature"])]),
    "multi_09": (["Attractions", "Hotels"], [(*ATTR_HK, []), (*HOTEL_SEARCH_HK, ["phone_number"])]),
    "multi_10": (["Restaurants", "RentalCars"], [(*REST_RESERVE_SD, []), (*CARS_RESERVE_OAK, ["price_per_day"])]),
}

SEED_SCHEMAS = {
    "sgd": {
        "service_name": "Flights",
        "intents": [
            intent("SearchOnewayFlight", False, ["origin_city", "destination_city", "departure_date"],
                   ["airlines"]),
            intent("ReserveOnewayFlight", True, ["origin_city", "destination_city", "departure_date",
                                                 "airlines"], ["number_of_tickets"]),
        ],
        "slots": [slot("origin_city"), slot("destination_city"), slot("departure_date"), slot("airlines"),
                  slot("number_of_tickets", ["1", "2", "3", "4"]), slot("price"), slot("outbound_departure_time")],
    },
    "bitod": {
        "service_name": "Metro",
        "intents": [intent("FindMetroRoute", False, ["departure", "destination"])],
        "slots": [slot("departure"), slot("destination"), slot("estimated_time"), slot("price")],
    },
}

SEED_ITEMS = {
    "sgd": [(call("SearchOnewayFlight", origin_city="Atlanta", destination_city="Boston",
                  departure_date="2024-03-04"),
             [{"airlines": "Delta Airlines", "outbound_departure_time": "07:40", "price": 214,
               "origin_city": "Atlanta", "destination_city": "Boston"}], ["price"]),
            (call("ReserveOnewayFlight", origin_city="Atlanta", destination_city="Boston",
                  departure_date="2024-03-04", airlines="Delta Airlines"),
             [{"airlines": "Delta Airlines", "outbound_departure_time": "07:40", "price": 214}], [])],
    "bitod": [(call("FindMetroRoute", departure="Central", destination="Tsim Sha Tsui"),
               [{"departure": "Central", "destination": "Tsim Sha Tsui", "estimated_time": "7 minutes",
                 "price": "HK$ 10.5"}], ["estimated_time"])],
}


def write(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def item_docs(dialog_id, domains, steps):
    goal = {"dialog_id": dialog_id, "domains": domains, "goal_calls": [s[0] for s in steps],
            "request_slots": [{"goal_index": i, "slots": s[2]} for i, s in enumerate(steps) if s[2]],
            "closing_utterance": "No, thank you for your help."}
    occurrence = {}
    results = []
    for text, rows, _ in steps:
        method = text.split("'")[1]
        k = occurrence.get(method, 0)
        occurrence[method] = k + 1
        results.append({"intent": method, "occurrence": k, "rows": rows})
    return goal, {"dialog_id": dialog_id, "results": results, "gold_requests": []}


def main():
    corpus = ROOT / "corpus"
    for sub in ("schemas", "goals", "results", "gold"):
        shutil.rmtree(corpus / sub, ignore_errors=True)
    for name, schema in SCHEMAS.items():
        write(corpus / "schemas" / f"{name}.json", schema)
    for dialog_id, (domains, steps) in ITEMS.items():
        goal, results = item_docs(dialog_id, domains, steps)
        write(corpus / "goals" / f"{dialog_id}.json", goal)
        write(corpus / "results" / f"{dialog_id}.json", results)
    specs = ROOT / "seed_specs"
    shutil.rmtree(specs, ignore_errors=True)
    for dataset, schema in SEED_SCHEMAS.items():
        goal, results = item_docs("seed_" + dataset, [schema["service_name"]], SEED_ITEMS[dataset])
        write(specs / dataset / "schema.json", schema)
        write(specs / dataset / "goal.json", goal)
        write(specs / dataset / "results.json", results)


if __name__ == "__main__":
    main()
