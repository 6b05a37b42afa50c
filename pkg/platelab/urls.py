"""
URL configuration for platelab: only the admin, where recorded
convergence runs can be browsed.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
